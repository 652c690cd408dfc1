#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "ff.hpp"

namespace theta {

// Dense univariate polynomial over F_p. Coefficient i multiplies U^i; the
// zero polynomial has an empty coefficient vector.
class Poly {
  public:
    Poly() : p_(0) {}
    explicit Poly(std::uint64_t p) : p_(p) {}
    Poly(std::uint64_t p, std::vector<Fp> coeffs) : p_(p), c_(std::move(coeffs)) { trim(); }

    static Poly zero(std::uint64_t p) { return Poly(p); }
    static Poly constant(const Fp& a) {
        Poly f(a.modulus());
        if (!a.is_zero()) f.c_ = {a};
        return f;
    }
    static Poly one(std::uint64_t p) { return constant(Fp(1, p)); }
    // The monomial U.
    static Poly unknown(std::uint64_t p) { return Poly(p, {Fp(0, p), Fp(1, p)}); }
    static Poly from_coeffs(std::uint64_t p, const std::vector<std::uint64_t>& c) {
        std::vector<Fp> v;
        v.reserve(c.size());
        for (auto x : c) v.emplace_back(x, p);
        return Poly(p, std::move(v));
    }

    std::uint64_t modulus() const { return p_; }
    bool is_zero() const { return c_.empty(); }
    // -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Fp>& coeffs() const { return c_; }
    Fp coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Fp(0, p_); }
    Fp leading() const { return c_.empty() ? Fp(0, p_) : c_.back(); }
    bool is_monic() const { return !c_.empty() && leading() == Fp(1, p_); }

    friend bool operator==(const Poly& f, const Poly& g) { return f.p_ == g.p_ && f.c_ == g.c_; }
    friend bool operator!=(const Poly& f, const Poly& g) { return !(f == g); }

    friend Poly operator+(const Poly& f, const Poly& g) {
        f.match(g);
        Poly r(f.p_);
        r.c_.resize(std::max(f.c_.size(), g.c_.size()), Fp(0, f.p_));
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = f.coeff(i) + g.coeff(i);
        r.trim();
        return r;
    }
    friend Poly operator-(const Poly& f, const Poly& g) {
        f.match(g);
        Poly r(f.p_);
        r.c_.resize(std::max(f.c_.size(), g.c_.size()), Fp(0, f.p_));
        for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] = f.coeff(i) - g.coeff(i);
        r.trim();
        return r;
    }
    Poly operator-() const {
        Poly r(p_);
        r.c_.reserve(c_.size());
        for (const auto& a : c_) r.c_.push_back(-a);
        return r;
    }

    friend Poly operator*(const Poly& f, const Poly& g) {
        f.match(g);
        if (f.is_zero() || g.is_zero()) return Poly(f.p_);
        std::vector<Fp> out = mul_rec(f.c_, g.c_, f.p_);
        return Poly(f.p_, std::move(out));
    }
    friend Poly operator*(const Poly& f, const Fp& a) {
        if (a.is_zero()) return Poly(f.p_);
        Poly r(f.p_);
        r.c_.reserve(f.c_.size());
        for (const auto& x : f.c_) r.c_.push_back(x * a);
        return r;
    }

    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    // Euclidean division: f = q*g + r with deg r < deg g.
    friend std::pair<Poly, Poly> divmod(const Poly& f, const Poly& g) {
        f.match(g);
        if (g.is_zero()) throw division_by_zero("polynomial division by zero");
        if (f.degree() < g.degree()) return {Poly(f.p_), f};
        Fp lginv = g.leading().inv();
        std::vector<Fp> rem = f.c_;
        int dq = f.degree() - g.degree();
        std::vector<Fp> quo(static_cast<std::size_t>(dq) + 1, Fp(0, f.p_));
        for (int k = dq; k >= 0; --k) {
            Fp t = rem[static_cast<std::size_t>(k + g.degree())] * lginv;
            quo[static_cast<std::size_t>(k)] = t;
            if (t.is_zero()) continue;
            for (int i = 0; i <= g.degree(); ++i)
                rem[static_cast<std::size_t>(k + i)] -= t * g.c_[static_cast<std::size_t>(i)];
        }
        rem.resize(static_cast<std::size_t>(std::max(g.degree(), 0)), Fp(0, f.p_));
        return {Poly(f.p_, std::move(quo)), Poly(f.p_, std::move(rem))};
    }
    friend Poly operator%(const Poly& f, const Poly& g) { return divmod(f, g).second; }
    friend Poly operator/(const Poly& f, const Poly& g) { return divmod(f, g).first; }

    Poly monic() const {
        if (is_zero()) return *this;
        return *this * leading().inv();
    }

    Poly derivative() const {
        Poly r(p_);
        for (std::size_t i = 1; i < c_.size(); ++i)
            r.c_.push_back(c_[i] * Fp(i % p_, p_));
        r.trim();
        return r;
    }

    Fp eval(const Fp& x) const {
        Fp acc(0, p_);
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
        return acc;
    }

    // Composition with U + c (Taylor shift by synthetic division).
    Poly shift(const Fp& c) const {
        std::vector<Fp> a = c_;
        for (std::size_t k = 0; k < a.size(); ++k)
            for (std::size_t i = a.size() - 1; i-- > k;)
                a[i] += a[i + 1] * c;
        return Poly(p_, std::move(a));
    }

  private:
    static constexpr std::size_t kKaratsubaThreshold = 32;

    static std::vector<Fp> mul_school(const std::vector<Fp>& a, const std::vector<Fp>& b,
                                      std::uint64_t p) {
        std::vector<Fp> out(a.size() + b.size() - 1, Fp(0, p));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
        }
        return out;
    }

    static std::vector<Fp> mul_rec(const std::vector<Fp>& a, const std::vector<Fp>& b,
                                   std::uint64_t p) {
        if (a.size() < kKaratsubaThreshold || b.size() < kKaratsubaThreshold)
            return mul_school(a, b, p);
        std::size_t h = std::max(a.size(), b.size()) / 2;
        auto split = [&](const std::vector<Fp>& v) {
            std::vector<Fp> lo(v.begin(), v.begin() + std::min(h, v.size()));
            std::vector<Fp> hi(v.begin() + std::min(h, v.size()), v.end());
            if (lo.empty()) lo.push_back(Fp(0, p));
            if (hi.empty()) hi.push_back(Fp(0, p));
            return std::make_pair(lo, hi);
        };
        auto [a0, a1] = split(a);
        auto [b0, b1] = split(b);
        auto addv = [&](const std::vector<Fp>& x, const std::vector<Fp>& y) {
            std::vector<Fp> r(std::max(x.size(), y.size()), Fp(0, p));
            for (std::size_t i = 0; i < r.size(); ++i) {
                Fp s(0, p);
                if (i < x.size()) s += x[i];
                if (i < y.size()) s += y[i];
                r[i] = s;
            }
            return r;
        };
        std::vector<Fp> z0 = mul_rec(a0, b0, p);
        std::vector<Fp> z2 = mul_rec(a1, b1, p);
        std::vector<Fp> z1 = mul_rec(addv(a0, a1), addv(b0, b1), p);
        std::vector<Fp> out(a.size() + b.size() - 1, Fp(0, p));
        auto acc = [&](const std::vector<Fp>& v, std::size_t off, bool negate_z0z2) {
            for (std::size_t i = 0; i < v.size() && off + i < out.size(); ++i)
                out[off + i] = negate_z0z2 ? out[off + i] - v[i] : out[off + i] + v[i];
        };
        acc(z0, 0, false);
        acc(z2, 2 * h, false);
        acc(z1, h, false);
        acc(z0, h, true);
        acc(z2, h, true);
        return out;
    }

    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    void match(const Poly& o) const {
        if (p_ != o.p_) throw usage_error("polynomial modulus mismatch");
    }

    std::uint64_t p_;
    std::vector<Fp> c_;
};

// Extended gcd: returns (d, u, v) with d = u*f + v*g, d monic.
inline std::tuple<Poly, Poly, Poly> xgcd(const Poly& f, const Poly& g) {
    if (f.is_zero() && g.is_zero()) throw usage_error("xgcd(0, 0) is undefined");
    std::uint64_t p = f.modulus();
    Poly r0 = f, r1 = g;
    Poly s0 = Poly::one(p), s1 = Poly::zero(p);
    Poly t0 = Poly::zero(p), t1 = Poly::one(p);
    while (!r1.is_zero()) {
        auto [q, r] = divmod(r0, r1);
        r0 = r1; r1 = r;
        Poly s = s0 - q * s1; s0 = s1; s1 = s;
        Poly t = t0 - q * t1; t0 = t1; t1 = t;
    }
    Fp lc = r0.leading();
    Fp li = lc.inv();
    return {r0 * li, s0 * li, t0 * li};
}

inline Poly gcd(const Poly& f, const Poly& g) {
    if (f.is_zero() && g.is_zero()) return f;
    Poly a = f, b = g;
    while (!b.is_zero()) {
        Poly r = a % b;
        a = b;
        b = r;
    }
    return a.monic();
}

inline bool is_squarefree(const Poly& f) {
    if (f.degree() <= 0) return true;
    return gcd(f, f.derivative()).degree() == 0;
}

// Largest squarefree divisor (valid for deg f < p, which holds throughout).
inline Poly squarefree_part(const Poly& f) {
    if (f.degree() <= 0) return f.monic();
    Poly g = gcd(f, f.derivative());
    return (f / g).monic();
}

// res(f, g) via the Euclidean remainder sequence.
inline Fp resultant(const Poly& f, const Poly& g) {
    std::uint64_t p = f.modulus();
    Poly a = f, b = g;
    Fp res(1, p);
    if (a.is_zero() || b.is_zero()) return Fp(0, p);
    while (b.degree() > 0) {
        Poly r = a % b;
        // res(a,b) = (-1)^{da db} lc(b)^{da - dr} res(b, r)
        int da = a.degree(), db = b.degree(), dr = r.degree();
        if ((da & 1) && (db & 1)) res = -res;
        res *= b.leading().pow(static_cast<std::uint64_t>(da - std::max(dr, 0)));
        if (r.is_zero()) return dr < 0 && a.degree() > 0 ? Fp(0, p) : res;
        a = b;
        b = r;
    }
    // b is a nonzero constant
    res *= b.leading().pow(static_cast<std::uint64_t>(a.degree()));
    return res;
}

// Lagrange interpolation through distinct nodes.
inline Poly interpolate(const std::vector<Fp>& xs, const std::vector<Fp>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw usage_error("interpolate: bad node set");
    std::uint64_t p = xs[0].modulus();
    Poly acc = Poly::zero(p);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Poly num = Poly::one(p);
        Fp den(1, p);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (j == i) continue;
            num *= Poly(p, {-xs[j], Fp(1, p)});
            den *= xs[i] - xs[j];
        }
        acc += num * (ys[i] * den.inv());
    }
    return acc;
}

// Precomputed context for repeated reduction modulo a fixed monic Q:
// Newton-inverted reversal, so each reduction is two multiplications.
class Reducer {
  public:
    Reducer() = default;
    explicit Reducer(Poly q) : q_(std::move(q)) {
        if (!q_.is_monic() || q_.degree() < 1)
            throw usage_error("Reducer wants a monic nonconstant modulus");
        n_ = static_cast<std::size_t>(q_.degree());
        qrev_ = reverse(q_, n_);
        // enough precision for products of two reduced residues
        rinv_ = inv_series(qrev_, n_);
    }

    const Poly& modulus() const { return q_; }

    Poly reduce(const Poly& f) const {
        if (f.degree() < q_.degree()) return f;
        std::size_t m = static_cast<std::size_t>(f.degree()) - n_ + 1;  // quotient length
        if (m > n_) return f % q_;  // rare long input; keep the object immutable
        Poly frev = reverse(f, static_cast<std::size_t>(f.degree()));
        Poly qrev = trunc(frev * trunc(rinv_, m), m);
        Poly quo = reverse(qrev, m - 1);
        Poly r = f - quo * q_;
        if (r.degree() >= q_.degree()) r = r % q_;
        return r;
    }

  private:
    static Poly trunc(const Poly& f, std::size_t k) {
        std::vector<Fp> c;
        for (std::size_t i = 0; i < k && static_cast<int>(i) <= f.degree(); ++i)
            c.push_back(f.coeff(i));
        return Poly(f.modulus(), std::move(c));
    }
    static Poly reverse(const Poly& f, std::size_t top) {
        std::vector<Fp> c(top + 1, Fp(0, f.modulus()));
        for (std::size_t i = 0; i <= top; ++i) c[top - i] = f.coeff(i);
        return Poly(f.modulus(), std::move(c));
    }
    // Newton iteration for 1/f mod U^k, f(0) = 1.
    static Poly inv_series(const Poly& f, std::size_t k) {
        std::uint64_t p = f.modulus();
        Poly g = Poly::one(p);
        std::size_t prec = 1;
        while (prec < k) {
            prec = std::min(2 * prec, k);
            g = trunc(g * (Poly::constant(Fp(2, p)) - trunc(f * g, prec)), prec);
        }
        return g;
    }

    Poly q_;
    Poly qrev_;
    Poly rinv_;
    std::size_t n_ = 0;
};

}  // namespace theta
