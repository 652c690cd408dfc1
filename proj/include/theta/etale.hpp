#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "poly.hpp"

namespace theta {

// Raised when a failed inversion exposes a proper factor of a modulus.
// Control flow, not an error: the caller refines the CRT decomposition
// and retries. `v_factor` is set for splits in the second tensor slot,
// where the factor may have coefficients in k[U]/(Q_u).
struct split_discovered {
    std::size_t component;
    Poly u_factor;                          // proper monic factor of the U-modulus
    std::vector<Poly> v_factor;             // V-factor, coeffs in K_u (empty if U-side)
    bool is_v_side() const { return !v_factor.empty(); }
};

// K = k[U]/(Q), stored as a list of pairwise-coprime squarefree monic
// components (the CRT decomposition discovered so far).
class EtaleAlgebra {
  public:
    explicit EtaleAlgebra(const Poly& q) : EtaleAlgebra(std::vector<Poly>{q}) {}

    explicit EtaleAlgebra(std::vector<Poly> moduli) {
        if (moduli.empty()) throw usage_error("etale algebra needs at least one modulus");
        p_ = moduli[0].modulus();
        for (auto& q : moduli) {
            Poly m = q.monic();
            if (m.degree() < 1) throw usage_error("etale modulus must be nonconstant");
            if (!is_squarefree(m)) throw usage_error("etale modulus must be squarefree");
            comps_.emplace_back(m);
        }
        for (std::size_t i = 0; i < comps_.size(); ++i)
            for (std::size_t j = i + 1; j < comps_.size(); ++j)
                if (gcd(comps_[i].modulus(), comps_[j].modulus()).degree() != 0)
                    throw usage_error("etale moduli must be pairwise coprime");
    }

    std::uint64_t modulus_p() const { return p_; }
    std::size_t component_count() const { return comps_.size(); }
    const Poly& component(std::size_t i) const { return comps_[i].modulus(); }
    const Reducer& reducer(std::size_t i) const { return comps_[i]; }
    int total_degree() const {
        int d = 0;
        for (const auto& c : comps_) d += c.modulus().degree();
        return d;
    }

    // Replace component `idx` by (factor, cofactor).
    std::shared_ptr<const EtaleAlgebra> refine(std::size_t idx, const Poly& factor) const {
        const Poly& q = comps_.at(idx).modulus();
        Poly f = factor.monic();
        auto [quo, rem] = divmod(q, f);
        if (!rem.is_zero() || f.degree() < 1 || f.degree() >= q.degree())
            throw internal_error("refine: not a proper factor");
        std::vector<Poly> next;
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            if (i == idx) {
                next.push_back(f);
                next.push_back(quo.monic());
            } else {
                next.push_back(comps_[i].modulus());
            }
        }
        return std::make_shared<EtaleAlgebra>(std::move(next));
    }

  private:
    std::uint64_t p_ = 0;
    std::vector<Reducer> comps_;
};

using AlgebraPtr = std::shared_ptr<const EtaleAlgebra>;

// Residue class in K: one reduced polynomial per CRT component.
class AlgebraElem {
  public:
    AlgebraElem() = default;
    AlgebraElem(AlgebraPtr alg, const Poly& value) : alg_(std::move(alg)) {
        r_.reserve(alg_->component_count());
        for (std::size_t i = 0; i < alg_->component_count(); ++i)
            r_.push_back(alg_->reducer(i).reduce(value));
    }

    static AlgebraElem from_residues(AlgebraPtr alg, std::vector<Poly> r) {
        AlgebraElem x;
        x.alg_ = std::move(alg);
        x.r_ = std::move(r);
        return x;
    }
    static AlgebraElem embed(const AlgebraPtr& alg, const Fp& c) {
        return AlgebraElem(alg, Poly::constant(c));
    }
    static AlgebraElem unknown(const AlgebraPtr& alg) {
        return AlgebraElem(alg, Poly::unknown(alg->modulus_p()));
    }

    const AlgebraPtr& algebra() const { return alg_; }
    const Poly& residue(std::size_t i) const { return r_[i]; }

    bool is_zero() const {
        for (const auto& r : r_)
            if (!r.is_zero()) return false;
        return true;
    }
    bool is_zero_in(std::size_t i) const { return r_[i].is_zero(); }

    friend AlgebraElem operator+(const AlgebraElem& a, const AlgebraElem& b) {
        a.match(b);
        std::vector<Poly> r;
        r.reserve(a.r_.size());
        for (std::size_t i = 0; i < a.r_.size(); ++i) r.push_back(a.r_[i] + b.r_[i]);
        return from_residues(a.alg_, std::move(r));
    }
    friend AlgebraElem operator-(const AlgebraElem& a, const AlgebraElem& b) {
        a.match(b);
        std::vector<Poly> r;
        r.reserve(a.r_.size());
        for (std::size_t i = 0; i < a.r_.size(); ++i) r.push_back(a.r_[i] - b.r_[i]);
        return from_residues(a.alg_, std::move(r));
    }
    friend AlgebraElem operator*(const AlgebraElem& a, const AlgebraElem& b) {
        a.match(b);
        std::vector<Poly> r;
        r.reserve(a.r_.size());
        for (std::size_t i = 0; i < a.r_.size(); ++i)
            r.push_back(a.alg_->reducer(i).reduce(a.r_[i] * b.r_[i]));
        return from_residues(a.alg_, std::move(r));
    }
    friend AlgebraElem operator*(const AlgebraElem& a, const Fp& c) {
        std::vector<Poly> r;
        r.reserve(a.r_.size());
        for (const auto& x : a.r_) r.push_back(x * c);
        return from_residues(a.alg_, std::move(r));
    }
    AlgebraElem operator-() const {
        std::vector<Poly> r;
        r.reserve(r_.size());
        for (const auto& x : r_) r.push_back(-x);
        return from_residues(alg_, std::move(r));
    }
    AlgebraElem& operator+=(const AlgebraElem& o) { return *this = *this + o; }
    AlgebraElem& operator-=(const AlgebraElem& o) { return *this = *this - o; }
    AlgebraElem& operator*=(const AlgebraElem& o) { return *this = *this * o; }

    friend bool operator==(const AlgebraElem& a, const AlgebraElem& b) {
        a.match(b);
        return a.r_ == b.r_;
    }
    friend bool operator!=(const AlgebraElem& a, const AlgebraElem& b) { return !(a == b); }

    // Multiplicative inverse, or a split of one modulus via the Euclidean
    // algorithm. Identically-zero components raise zero_divisor_error.
    AlgebraElem inv() const {
        std::vector<Poly> out;
        out.reserve(r_.size());
        for (std::size_t i = 0; i < r_.size(); ++i) {
            const Poly& q = alg_->component(i);
            if (r_[i].is_zero()) throw zero_divisor_error(i, "inverse of zero in component");
            auto [d, u, v] = xgcd(r_[i], q);
            if (d.degree() != 0) throw split_discovered{i, d, {}};
            out.push_back(alg_->reducer(i).reduce(u * d.coeff(0).inv()));
        }
        return from_residues(alg_, std::move(out));
    }

    AlgebraElem pow(std::uint64_t e) const {
        AlgebraElem acc = embed(alg_, Fp(1, alg_->modulus_p()));
        AlgebraElem base = *this;
        while (e) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

  private:
    void match(const AlgebraElem& o) const {
        if (alg_ != o.alg_) {
            if (!alg_ || !o.alg_ || alg_->modulus_p() != o.alg_->modulus_p() ||
                alg_->component_count() != o.alg_->component_count())
                throw usage_error("algebra element mismatch");
            for (std::size_t i = 0; i < alg_->component_count(); ++i)
                if (alg_->component(i) != o.alg_->component(i))
                    throw usage_error("algebra element mismatch");
        }
    }

    AlgebraPtr alg_;
    std::vector<Poly> r_;
};

inline AlgebraElem zero_like(const AlgebraElem& x) {
    return AlgebraElem::embed(x.algebra(), Fp(0, x.algebra()->modulus_p()));
}
inline AlgebraElem one_like(const AlgebraElem& x) {
    return AlgebraElem::embed(x.algebra(), Fp(1, x.algebra()->modulus_p()));
}

// Sum of w over all roots of Q in the algebraic closure: the quotient T of
// the Euclidean division of U*w*Q' by Q, evaluated at 0. Components add.
inline Fp trace_sum(const AlgebraElem& w) {
    const auto& alg = *w.algebra();
    Fp acc(0, alg.modulus_p());
    Poly u = Poly::unknown(alg.modulus_p());
    for (std::size_t i = 0; i < alg.component_count(); ++i) {
        const Poly& q = alg.component(i);
        Poly num = u * w.residue(i) * q.derivative();
        auto [t, s] = divmod(num, q);
        acc += t.coeff(0);
    }
    return acc;
}

// Geometric specialisation at a root of one modulus.
inline Fp specialize(const AlgebraElem& x, const Fp& root) {
    const auto& alg = *x.algebra();
    for (std::size_t i = 0; i < alg.component_count(); ++i)
        if (alg.component(i).eval(root).is_zero()) return x.residue(i).eval(root);
    throw usage_error("specialize: value is not a root of any modulus");
}

// ---------------------------------------------------------------------------
// B = K (x) K. Components are pairs: a U-modulus over F_p together with a
// monic V-modulus whose coefficients live in k[U]/(Q_u). Fresh algebras use
// scalar V-moduli; V-side splits may introduce genuine K_u-coefficients.
// ---------------------------------------------------------------------------

// Polynomial in V with coefficients in k[U]/(Q_u), always reduced.
using VPoly = std::vector<Poly>;  // index = V-degree

class TensorAlgebra;
using TensorPtr = std::shared_ptr<const TensorAlgebra>;

class TensorAlgebra {
  public:
    struct Component {
        Reducer uq;     // U-modulus over F_p
        VPoly vq;       // monic in V, coefficients reduced mod uq
    };

    // Fresh B = K (x) K from the component list of K.
    static TensorPtr make(const AlgebraPtr& base) {
        auto t = std::make_shared<TensorAlgebra>();
        t->p_ = base->modulus_p();
        for (std::size_t i = 0; i < base->component_count(); ++i)
            for (std::size_t j = 0; j < base->component_count(); ++j)
                t->comps_.push_back(make_component(base->component(i), base->component(j)));
        return t;
    }

    static Component make_component(const Poly& qu, const Poly& qv_scalar) {
        Component c;
        c.uq = Reducer(qu.monic());
        Poly m = qv_scalar.monic();
        c.vq.resize(static_cast<std::size_t>(m.degree()) + 1);
        for (int k = 0; k <= m.degree(); ++k)
            c.vq[static_cast<std::size_t>(k)] = Poly::constant(m.coeff(static_cast<std::size_t>(k)));
        return c;
    }

    std::uint64_t modulus_p() const { return p_; }
    std::size_t component_count() const { return comps_.size(); }
    const Component& component(std::size_t i) const { return comps_[i]; }

    TensorPtr refine_u(std::size_t idx, const Poly& factor) const {
        auto t = std::make_shared<TensorAlgebra>();
        t->p_ = p_;
        const Component& c = comps_.at(idx);
        Poly f = factor.monic();
        Poly cof = (c.uq.modulus() / f).monic();
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            if (i != idx) {
                t->comps_.push_back(comps_[i]);
                continue;
            }
            for (const Poly& part : {f, cof}) {
                Component nc;
                nc.uq = Reducer(part);
                nc.vq.reserve(c.vq.size());
                for (const auto& co : c.vq) nc.vq.push_back(nc.uq.reduce(co));
                t->comps_.push_back(std::move(nc));
            }
        }
        return t;
    }

    TensorPtr refine_v(std::size_t idx, const VPoly& factor) const;

    TensorPtr single_component(std::size_t i) const {
        auto t = std::make_shared<TensorAlgebra>();
        t->p_ = p_;
        t->comps_.push_back(comps_.at(i));
        return t;
    }

    std::size_t vdeg(std::size_t i) const { return comps_[i].vq.size() - 1; }

  private:
    std::uint64_t p_ = 0;
    std::vector<Component> comps_;
    friend class TensorElem;
};

namespace vp {

inline bool is_zero(const VPoly& f) {
    for (const auto& c : f)
        if (!c.is_zero()) return false;
    return true;
}
inline int degree(const VPoly& f) {
    for (std::size_t i = f.size(); i-- > 0;)
        if (!f[i].is_zero()) return static_cast<int>(i);
    return -1;
}
inline void trim(VPoly& f) {
    while (!f.empty() && f.back().is_zero()) f.pop_back();
}
inline VPoly add(const VPoly& a, const VPoly& b, std::uint64_t p) {
    VPoly r(std::max(a.size(), b.size()), Poly(p));
    for (std::size_t i = 0; i < r.size(); ++i) {
        Poly s(p);
        if (i < a.size()) s += a[i];
        if (i < b.size()) s += b[i];
        r[i] = s;
    }
    trim(r);
    return r;
}
inline VPoly sub(const VPoly& a, const VPoly& b, std::uint64_t p) {
    VPoly r(std::max(a.size(), b.size()), Poly(p));
    for (std::size_t i = 0; i < r.size(); ++i) {
        Poly s(p);
        if (i < a.size()) s += a[i];
        if (i < b.size()) s -= b[i];
        r[i] = s;
    }
    trim(r);
    return r;
}
inline VPoly mul(const VPoly& a, const VPoly& b, const Reducer& uq, std::uint64_t p) {
    if (is_zero(a) || is_zero(b)) return {};
    VPoly r(a.size() + b.size() - 1, Poly(p));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    }
    for (auto& c : r) c = uq.reduce(c);
    trim(r);
    return r;
}
// Remainder of a modulo the monic (leading coefficient 1) divisor m.
inline VPoly rem_monic(VPoly a, const VPoly& m, const Reducer& uq, std::uint64_t p) {
    int dm = degree(m);
    trim(a);
    while (degree(a) >= dm) {
        std::size_t k = static_cast<std::size_t>(degree(a));
        Poly lead = a[k];
        for (int i = 0; i <= dm; ++i)
            a[k - static_cast<std::size_t>(dm) + static_cast<std::size_t>(i)] -=
                lead * m[static_cast<std::size_t>(i)];
        a[k] = uq.reduce(a[k]);
        for (std::size_t i = k - static_cast<std::size_t>(dm); i < k; ++i) a[i] = uq.reduce(a[i]);
        trim(a);
    }
    return a;
}
// Exact division by a monic divisor.
inline VPoly div_monic(VPoly a, const VPoly& m, const Reducer& uq, std::uint64_t p) {
    int dm = degree(m);
    trim(a);
    int da = degree(a);
    if (da < dm) return {};
    VPoly q(static_cast<std::size_t>(da - dm) + 1, Poly(p));
    while (degree(a) >= dm) {
        std::size_t k = static_cast<std::size_t>(degree(a));
        Poly lead = a[k];
        q[k - static_cast<std::size_t>(dm)] = lead;
        for (int i = 0; i <= dm; ++i)
            a[k - static_cast<std::size_t>(dm) + static_cast<std::size_t>(i)] -=
                lead * m[static_cast<std::size_t>(i)];
        for (std::size_t i = k - static_cast<std::size_t>(dm); i <= k; ++i) a[i] = uq.reduce(a[i]);
        trim(a);
    }
    return q;
}
inline VPoly derivative(const VPoly& f, std::uint64_t p) {
    VPoly r;
    for (std::size_t i = 1; i < f.size(); ++i) r.push_back(f[i] * Fp(i % p, p));
    trim(r);
    return r;
}

}  // namespace vp

inline TensorPtr TensorAlgebra::refine_v(std::size_t idx, const VPoly& factor) const {
    auto t = std::make_shared<TensorAlgebra>();
    t->p_ = p_;
    const Component& c = comps_.at(idx);
    VPoly cof = vp::div_monic(c.vq, factor, c.uq, p_);
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        if (i != idx) {
            t->comps_.push_back(comps_[i]);
            continue;
        }
        for (const VPoly* part : {&factor, const_cast<const VPoly*>(&cof)}) {
            Component nc;
            nc.uq = c.uq;
            nc.vq = *part;
            t->comps_.push_back(std::move(nc));
        }
    }
    return t;
}

// Residue class in B: per component, a V-polynomial of degree < deg vq with
// coefficients reduced mod the U-modulus.
class TensorElem {
  public:
    TensorElem() = default;

    static TensorElem from_residues(TensorPtr alg, std::vector<VPoly> r) {
        TensorElem x;
        x.alg_ = std::move(alg);
        x.r_ = std::move(r);
        return x;
    }
    static TensorElem embed(const TensorPtr& alg, const Fp& c) {
        std::vector<VPoly> r(alg->component_count());
        for (auto& v : r)
            if (!c.is_zero()) v = {Poly::constant(c)};
        return from_residues(alg, std::move(r));
    }
    // f(U) (x) 1: reduce a global polynomial into every U-slot.
    static TensorElem embed_first(const TensorPtr& alg, const Poly& f) {
        std::vector<VPoly> r(alg->component_count());
        for (std::size_t i = 0; i < alg->component_count(); ++i) {
            Poly red = alg->component(i).uq.reduce(f);
            if (!red.is_zero()) r[i] = {red};
        }
        return from_residues(alg, std::move(r));
    }
    // 1 (x) f(V): the same polynomial read in the second slot.
    static TensorElem embed_second(const TensorPtr& alg, const Poly& f) {
        std::vector<VPoly> r(alg->component_count());
        for (std::size_t i = 0; i < alg->component_count(); ++i) {
            const auto& comp = alg->component(i);
            VPoly v;
            v.reserve(static_cast<std::size_t>(f.degree()) + 1);
            for (int k = 0; k <= f.degree(); ++k)
                v.push_back(Poly::constant(f.coeff(static_cast<std::size_t>(k))));
            vp::trim(v);
            r[i] = vp::rem_monic(std::move(v), comp.vq, comp.uq, alg->modulus_p());
        }
        return from_residues(alg, std::move(r));
    }

    const TensorPtr& algebra() const { return alg_; }
    const VPoly& residue(std::size_t i) const { return r_[i]; }

    bool is_zero() const {
        for (const auto& r : r_)
            if (!vp::is_zero(r)) return false;
        return true;
    }

    friend TensorElem operator+(const TensorElem& a, const TensorElem& b) {
        a.match(b);
        std::vector<VPoly> r(a.r_.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = vp::add(a.r_[i], b.r_[i], a.alg_->modulus_p());
        return from_residues(a.alg_, std::move(r));
    }
    friend TensorElem operator-(const TensorElem& a, const TensorElem& b) {
        a.match(b);
        std::vector<VPoly> r(a.r_.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = vp::sub(a.r_[i], b.r_[i], a.alg_->modulus_p());
        return from_residues(a.alg_, std::move(r));
    }
    friend TensorElem operator*(const TensorElem& a, const TensorElem& b) {
        a.match(b);
        std::vector<VPoly> r(a.r_.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto& comp = a.alg_->component(i);
            VPoly prod = vp::mul(a.r_[i], b.r_[i], comp.uq, a.alg_->modulus_p());
            r[i] = vp::rem_monic(std::move(prod), comp.vq, comp.uq, a.alg_->modulus_p());
        }
        return from_residues(a.alg_, std::move(r));
    }
    friend TensorElem operator*(const TensorElem& a, const Fp& c) {
        std::vector<VPoly> r(a.r_.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = a.r_[i];
            for (auto& co : r[i]) co = co * c;
            vp::trim(r[i]);
        }
        return from_residues(a.alg_, std::move(r));
    }
    TensorElem operator-() const {
        std::vector<VPoly> r(r_.size());
        for (std::size_t i = 0; i < r_.size(); ++i) {
            r[i] = r_[i];
            for (auto& co : r[i]) co = -co;
        }
        return from_residues(alg_, std::move(r));
    }
    TensorElem& operator+=(const TensorElem& o) { return *this = *this + o; }
    TensorElem& operator-=(const TensorElem& o) { return *this = *this - o; }
    TensorElem& operator*=(const TensorElem& o) { return *this = *this * o; }
    friend bool operator==(const TensorElem& a, const TensorElem& b) {
        a.match(b);
        return a.r_ == b.r_;
    }
    friend bool operator!=(const TensorElem& a, const TensorElem& b) { return !(a == b); }

    // Extended Euclid in V over K_u. Leading-coefficient inversions may
    // expose U-side splits; a nonconstant gcd exposes a V-side split.
    TensorElem inv() const {
        std::vector<VPoly> out(r_.size());
        std::uint64_t p = alg_->modulus_p();
        for (std::size_t i = 0; i < r_.size(); ++i) {
            const auto& comp = alg_->component(i);
            if (vp::is_zero(r_[i])) throw zero_divisor_error(i, "inverse of zero in tensor component");
            VPoly r0 = comp.vq, r1 = r_[i];
            VPoly s0 = {}, s1 = {Poly::one(p)};
            while (!vp::is_zero(r1)) {
                // make r1 monic, tracking the scaling
                std::size_t d1 = static_cast<std::size_t>(vp::degree(r1));
                Poly lead = r1[d1];
                Poly linv = invert_in_ku(lead, comp.uq, i);
                VPoly r1m = r1, s1m = s1;
                for (auto& c : r1m) c = comp.uq.reduce(c * linv);
                for (auto& c : s1m) c = comp.uq.reduce(c * linv);
                vp::trim(r1m);
                if (vp::degree(r0) < vp::degree(r1m)) {
                    std::swap(r0, r1m);
                    std::swap(s0, s1m);
                    r1 = r1m;
                    s1 = s1m;
                    continue;
                }
                // one division step: r0 = q*r1m + r
                VPoly q = vq_quotient(r0, r1m, comp.uq, p);
                VPoly r = vp::sub(r0, vp::mul(q, r1m, comp.uq, p), p);
                VPoly s = vp::sub(s0, vp::mul(q, s1m, comp.uq, p), p);
                r0 = r1m;
                s0 = s1m;
                r1 = r;
                s1 = s;
            }
            int d0 = vp::degree(r0);
            if (d0 > 0) {
                if (d0 == static_cast<int>(alg_->vdeg(i)))
                    throw zero_divisor_error(i, "tensor element is zero modulo component");
                throw split_discovered{i, Poly(p), r0};
            }
            Poly unit = r0[0];
            Poly uinv = invert_in_ku(unit, comp.uq, i);
            for (auto& c : s0) c = comp.uq.reduce(c * uinv);
            vp::trim(s0);
            out[i] = vp::rem_monic(std::move(s0), comp.vq, comp.uq, p);
        }
        return from_residues(alg_, std::move(out));
    }

    // Trace out the second slot: arity-2 -> arity-1 residues per component.
    // Returned per-component pairs (U-modulus, K_u-value); summing the plain
    // trace over each gives the full double sum.
    Fp tensor_trace() const {
        std::uint64_t p = alg_->modulus_p();
        Fp acc(0, p);
        for (std::size_t i = 0; i < r_.size(); ++i) {
            const auto& comp = alg_->component(i);
            // T = quotient of V*W*vq' by vq; value at V=0 is T[0]
            VPoly vw(r_[i].size() + 1, Poly(p));
            for (std::size_t k = 0; k < r_[i].size(); ++k) vw[k + 1] = r_[i][k];
            VPoly num = vp::mul(vw, vp::derivative(comp.vq, p), comp.uq, p);
            VPoly t = vq_quotient(num, comp.vq, comp.uq, p);
            Poly w1 = t.empty() ? Poly(p) : t[0];
            // then the plain trace lemma over the U-modulus
            Poly u = Poly::unknown(p);
            auto [tu, su] = divmod(u * w1 * comp.uq.modulus().derivative(), comp.uq.modulus());
            acc += tu.coeff(0);
        }
        return acc;
    }

    TensorElem pow(std::uint64_t e) const {
        TensorElem acc = embed(alg_, Fp(1, alg_->modulus_p()));
        TensorElem base = *this;
        while (e) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    // Specialise the given slot (0 = U, 1 = V) at a root in F_p, producing
    // arity-1 data. Only supported for scalar V-moduli.
    AlgebraElem specialize_slot(int slot, const Fp& root) const;

    // Mirror map swapping the two tensor slots (scalar V-moduli only).
    TensorElem swapped() const;

  private:
    static Poly scalar_vq(const TensorAlgebra::Component& comp) {
        std::vector<Fp> c;
        c.reserve(comp.vq.size());
        for (const auto& co : comp.vq) {
            if (co.degree() > 0) throw usage_error("operation requires a scalar V-modulus");
            c.push_back(co.coeff(0));
        }
        return Poly(comp.uq.modulus().modulus(), std::move(c));
    }
    Poly invert_in_ku(const Poly& a, const Reducer& uq, std::size_t comp) const {
        if (a.is_zero()) throw internal_error("invert_in_ku: zero leading coefficient survived trim");
        auto [d, u, v] = xgcd(a, uq.modulus());
        if (d.degree() != 0) throw split_discovered{comp, d, {}};
        return uq.reduce(u * d.coeff(0).inv());
    }
    VPoly vq_quotient(VPoly a, const VPoly& m, const Reducer& uq, std::uint64_t p) const {
        return vp::div_monic(std::move(a), m, uq, p);
    }
    void match(const TensorElem& o) const {
        if (alg_ != o.alg_) throw usage_error("tensor element algebra mismatch");
    }

    TensorPtr alg_;
    std::vector<VPoly> r_;
};

inline TensorElem zero_like(const TensorElem& x) {
    return TensorElem::embed(x.algebra(), Fp(0, x.algebra()->modulus_p()));
}
inline TensorElem one_like(const TensorElem& x) {
    return TensorElem::embed(x.algebra(), Fp(1, x.algebra()->modulus_p()));
}

inline Fp tensor_trace_sum(const TensorElem& w) { return w.tensor_trace(); }

inline AlgebraElem TensorElem::specialize_slot(int slot, const Fp& root) const {
    std::uint64_t p = alg_->modulus_p();
    // collect the surviving moduli and residues (scalar V-moduli only)
    std::vector<Poly> moduli;
    std::vector<Poly> residues;
    for (std::size_t i = 0; i < r_.size(); ++i) {
        const auto& comp = alg_->component(i);
        Poly qv = scalar_vq(comp);
        Poly survivor;
        Poly value(p);
        if (slot == 1) {
            if (!qv.eval(root).is_zero()) continue;
            survivor = comp.uq.modulus();
            Fp powr(1, p);
            for (std::size_t k = 0; k < r_[i].size(); ++k) {
                value += r_[i][k] * powr;
                powr *= root;
            }
            value = comp.uq.reduce(value);
        } else {
            if (!comp.uq.modulus().eval(root).is_zero()) continue;
            survivor = qv;
            std::vector<Fp> c;
            c.reserve(r_[i].size());
            for (const auto& co : r_[i]) c.push_back(co.eval(root));
            value = Poly(p, std::move(c)) % qv;
        }
        bool seen = false;
        for (const auto& m : moduli)
            if (m == survivor) { seen = true; break; }
        if (!seen) {
            moduli.push_back(survivor);
            residues.push_back(value);
        }
    }
    if (moduli.empty()) throw usage_error("specialize_slot: value is not a root of the slot modulus");
    auto alg = std::make_shared<EtaleAlgebra>(moduli);
    return AlgebraElem::from_residues(alg, residues);
}

inline TensorElem TensorElem::swapped() const {
    std::uint64_t p = alg_->modulus_p();
    // locate, for each component (i,j), the mirror (j,i); valid only when all
    // V-moduli are scalar
    std::vector<VPoly> out(r_.size());
    std::vector<int> mirror(r_.size(), -1);
    for (std::size_t a = 0; a < r_.size(); ++a) {
        Poly qu_a = alg_->component(a).uq.modulus();
        Poly qv_a = scalar_vq(alg_->component(a));
        for (std::size_t b = 0; b < r_.size(); ++b) {
            if (alg_->component(b).uq.modulus() == qv_a && scalar_vq(alg_->component(b)) == qu_a) {
                mirror[a] = static_cast<int>(b);
                break;
            }
        }
        if (mirror[a] < 0) throw usage_error("swapped: no mirror component");
    }
    for (std::size_t a = 0; a < r_.size(); ++a) {
        const auto& src = r_[static_cast<std::size_t>(mirror[a])];
        // transpose the coefficient matrix of the mirror residue
        const auto& comp = alg_->component(a);
        std::size_t du = static_cast<std::size_t>(comp.uq.modulus().degree());
        std::size_t dv = alg_->vdeg(a);
        VPoly t(dv, Poly(p));
        for (std::size_t vj = 0; vj < dv; ++vj) {
            std::vector<Fp> row(du, Fp(0, p));
            for (std::size_t ui = 0; ui < du; ++ui) {
                // coefficient of U^ui V^vj in the swap = coeff of U^vj V^ui in src
                Fp c = ui < src.size() ? src[ui].coeff(vj) : Fp(0, p);
                row[ui] = c;
            }
            t[vj] = Poly(p, std::move(row));
        }
        vp::trim(t);
        out[a] = t;
    }
    return from_residues(alg_, std::move(out));
}

}  // namespace theta
