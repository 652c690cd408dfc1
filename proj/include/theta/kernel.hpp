#pragma once

#include <map>
#include <string>
#include <vector>

#include "theta_point.hpp"

namespace theta {

enum class KernelConvention { full, punctured, kummer_half };

inline const char* to_string(KernelConvention c) {
    switch (c) {
        case KernelConvention::full: return "full";
        case KernelConvention::punctured: return "punctured";
        case KernelConvention::kummer_half: return "kummer_half";
    }
    return "?";
}

// The kernel K in single-polynomial normal form: Q plus one coordinate
// polynomial per theta index, C_0 = 1 and C_{i1} = U.
struct KernelDescriptor {
    unsigned long long ell = 0;
    KernelConvention convention = KernelConvention::full;
    Poly Q;
    std::vector<Poly> coords;  // indexed by the theta enumeration

    std::size_t i1() const {
        std::uint64_t p = Q.modulus();
        for (std::size_t i = 1; i < coords.size(); ++i)
            if (coords[i] == Poly::unknown(p)) return i;
        throw invalid_kernel("no coordinate equals U; the kernel is not in normal form");
    }

    long long expected_degree(int g) const {
        long long lg = 1;
        for (int i = 0; i < g; ++i) lg *= static_cast<long long>(ell);
        switch (convention) {
            case KernelConvention::full: return lg;
            case KernelConvention::punctured: return lg - 1;
            case KernelConvention::kummer_half: return (lg - 1) / 2;
        }
        return -1;
    }
};

// Structural checks that do not need any arithmetic beyond gcds.
inline void check_kernel_shape(const KernelDescriptor& kd, const ThetaNullPoint& null) {
    const IndexGroup& idx = null.index();
    if (kd.ell < 3 || kd.ell % 2 == 0) throw invalid_kernel("ell must be odd and >= 3");
    if (std::__gcd(kd.ell, static_cast<unsigned long long>(idx.n())) != 1)
        throw invalid_kernel("ell must be coprime to the level n");
    if (kd.ell % null.modulus_p() == 0) throw invalid_kernel("ell must be coprime to p");
    if (kd.coords.size() != idx.size()) throw invalid_kernel("kernel coordinate count != n^g");
    if (kd.coords[0] != Poly::one(null.modulus_p()))
        throw invalid_kernel("the 0-coordinate must be the unit (U_0 is the normalizing factor)");
    if (!kd.Q.is_monic()) throw invalid_kernel("Q must be monic");
    if (!is_squarefree(kd.Q)) throw invalid_kernel("Q must be squarefree");
    if (kd.convention == KernelConvention::kummer_half && idx.n() != 2)
        throw invalid_kernel("kummer_half kernels only exist at level 2");
    if (kd.Q.degree() != kd.expected_degree(idx.g()))
        throw invalid_kernel("deg Q does not match the declared convention");
    for (const auto& c : kd.coords)
        if (c.degree() >= kd.Q.degree() && kd.Q.degree() > 0)
            throw invalid_kernel("coordinate polynomials must be reduced mod Q");
    (void)kd.i1();
}

// Bring raw input into a usable etale form. Level-2 input arrives on the
// Kummer variety: nonzero points carry multiplicity two and the zero point
// may sit among the roots. Strip both and re-derive the convention.
inline KernelDescriptor canonicalize_kernel(KernelDescriptor kd, const ThetaNullPoint& null) {
    const IndexGroup& idx = null.index();
    std::uint64_t p = null.modulus_p();
    kd.Q = kd.Q.monic();
    if (!is_squarefree(kd.Q)) kd.Q = squarefree_part(kd.Q);
    for (auto& c : kd.coords) c = c % kd.Q;
    // remove the zero point's root when present: it is the root where the
    // coordinate tuple is proportional to the null point
    std::size_t i1 = kd.i1();
    if (!null.coords()[0].is_zero()) {
        Fp u0 = null.coords()[i1] / null.coords()[0];
        if (kd.Q.eval(u0).is_zero()) {
            bool proportional = true;
            for (std::size_t v = 0; v < idx.size() && proportional; ++v)
                proportional = kd.coords[v].eval(u0) * null.coords()[0] ==
                               kd.coords[0].eval(u0) * null.coords()[v];
            if (proportional) {
                kd.Q = kd.Q / Poly(p, {-u0, Fp(1, p)});
                for (auto& c : kd.coords) c = c % kd.Q;
            }
        }
    }
    long long lg = 1;
    for (int i = 0; i < idx.g(); ++i) lg *= static_cast<long long>(kd.ell);
    if (kd.Q.degree() == lg)
        kd.convention = KernelConvention::full;
    else if (kd.Q.degree() == lg - 1)
        kd.convention = KernelConvention::punctured;
    else if (idx.n() == 2 && kd.Q.degree() == (lg - 1) / 2)
        kd.convention = KernelConvention::kummer_half;
    else
        throw invalid_kernel("kernel polynomial degree matches no convention");
    return kd;
}

// The canonical formal point I_K over a component algebra, with a fresh
// formal parameter at `slot` out of `nparams`.
inline AffinePoint<AlgebraElem> formal_point(const KernelDescriptor& kd, const AlgebraPtr& K,
                                             std::size_t nparams = 1, std::size_t slot = 0) {
    AffinePoint<AlgebraElem> pt;
    pt.coords.reserve(kd.coords.size());
    for (const auto& c : kd.coords) pt.coords.emplace_back(K, c);
    pt.exps.assign(nparams, 0);
    pt.exps[slot] = 1;
    return pt;
}

struct KernelDiagnostics {
    bool pass = false;
    std::string reason;
    std::vector<Poly> failing_factors;
};

// Checks the maximal-isotropy hypotheses that are visible from this side:
// ell * I_K = 0 projectively in every CRT component, the zero point under
// FULL, and the coprimality conditions.
inline KernelDiagnostics validate_kernel(const KernelDescriptor& kd, const ThetaNullPoint& null) {
    KernelDiagnostics diag;
    try {
        check_kernel_shape(kd, null);
    } catch (const invalid_kernel& e) {
        diag.reason = e.what();
        return diag;
    }
    std::uint64_t p = null.modulus_p();
    if (kd.convention == KernelConvention::full) {
        std::size_t i1 = kd.i1();
        if (null.coords()[0].is_zero()) {
            diag.reason = "full kernel but the null point has zero normalizing coordinate";
            return diag;
        }
        Fp u0 = null.coords()[i1] / null.coords()[0];
        if (!kd.Q.eval(u0).is_zero()) {
            diag.reason = "full kernel misses the zero point among the roots of Q";
            return diag;
        }
    }
    // ell-torsion per component, refining lazily on discovered factors
    std::vector<Poly> queue = {kd.Q};
    int guard = 0;
    while (!queue.empty()) {
        if (++guard > 4 * kd.Q.degree() + 8) {
            diag.reason = "refinement did not terminate";
            return diag;
        }
        Poly q = queue.back();
        queue.pop_back();
        try {
            auto K = std::make_shared<EtaleAlgebra>(q);
            auto pt = formal_point(kd, K);
            auto mult = scalar_mult(kd.ell, pt, null);
            AffinePoint<AlgebraElem> zero = null.embedded(pt.coords[0], 1);
            zero.exps = mult.exps;
            if (!proj_equal(mult, zero)) {
                diag.reason = "ell-torsion check failed";
                diag.failing_factors.push_back(q);
                return diag;
            }
        } catch (const split_discovered& s) {
            Poly f = s.u_factor.monic();
            queue.push_back(f);
            queue.push_back((q / f).monic());
        } catch (const degenerate_input& e) {
            diag.reason = std::string("degenerate component: ") + e.what();
            diag.failing_factors.push_back(q);
            return diag;
        }
    }
    diag.pass = true;
    return diag;
}

}  // namespace theta
