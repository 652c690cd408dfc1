#pragma once

#include <optional>
#include <vector>

#include "poly.hpp"

namespace theta {

// y^2 = x^3 + a2 x^2 + a4 x + a6 over F_p (a1 = a3 = 0, p odd).
struct WeierstrassCurve {
    Fp a2, a4, a6;

    std::uint64_t modulus() const { return a2.modulus(); }
    Fp rhs(const Fp& x) const { return ((x + a2) * x + a4) * x + a6; }

    Fp b2() const { return a2 * Fp(4, modulus()); }
    Fp b4() const { return a4 * Fp(2, modulus()); }
    Fp b6() const { return a6 * Fp(4, modulus()); }
    Fp b8() const { return a2 * a6 * Fp(4, modulus()) - a4 * a4; }
    Fp c4() const { return b2() * b2() - b4() * Fp(24, modulus()); }
    Fp c6() const {
        return -(b2() * b2() * b2()) + b2() * b4() * Fp(36, modulus()) -
               b6() * Fp(216, modulus());
    }
    Fp discriminant() const {
        Fp B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
        return -(B2 * B2 * B8) - B4 * B4 * B4 * Fp(8, modulus()) -
               B6 * B6 * Fp(27, modulus()) + B2 * B4 * B6 * Fp(9, modulus());
    }
};

inline Fp j_invariant(const WeierstrassCurve& E) {
    Fp disc = E.discriminant();
    if (disc.is_zero()) throw usage_error("singular curve has no j-invariant");
    Fp C4 = E.c4();
    return C4 * C4 * C4 * disc.inv();
}

struct CurvePoint {
    bool infinity = true;
    Fp x, y;

    static CurvePoint at_infinity() { return {}; }
    static CurvePoint make(const Fp& x, const Fp& y) { return {false, x, y}; }
};

inline bool on_curve(const WeierstrassCurve& E, const CurvePoint& P) {
    if (P.infinity) return true;
    return P.y * P.y == E.rhs(P.x);
}

inline CurvePoint curve_neg(const CurvePoint& P) {
    if (P.infinity) return P;
    return CurvePoint::make(P.x, -P.y);
}

inline CurvePoint curve_add(const WeierstrassCurve& E, const CurvePoint& P, const CurvePoint& Q) {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    std::uint64_t p = E.modulus();
    if (P.x == Q.x) {
        if (P.y + Q.y == Fp(0, p)) return CurvePoint::at_infinity();
        // doubling
        Fp num = P.x * P.x * Fp(3, p) + E.a2 * P.x * Fp(2, p) + E.a4;
        Fp lam = num * (P.y * Fp(2, p)).inv();
        Fp x3 = lam * lam - E.a2 - P.x - Q.x;
        Fp y3 = lam * (P.x - x3) - P.y;
        return CurvePoint::make(x3, y3);
    }
    Fp lam = (Q.y - P.y) * (Q.x - P.x).inv();
    Fp x3 = lam * lam - E.a2 - P.x - Q.x;
    Fp y3 = lam * (P.x - x3) - P.y;
    return CurvePoint::make(x3, y3);
}

inline CurvePoint curve_mul(const WeierstrassCurve& E, unsigned long long m, CurvePoint P) {
    CurvePoint acc = CurvePoint::at_infinity();
    while (m) {
        if (m & 1) acc = curve_add(E, acc, P);
        P = curve_add(E, P, P);
        m >>= 1;
    }
    return acc;
}

// Division polynomials of y^2 = x^3 + A x + B, with the standard reduced
// representation: psi_m = P_m for odd m and psi_m = y P_m for even m.
inline std::vector<Poly> division_polys(const Fp& A, const Fp& B, unsigned long long up_to) {
    std::uint64_t p = A.modulus();
    Poly F = Poly(p, {B, A, Fp(0, p), Fp(1, p)});
    std::vector<Poly> P(std::max<unsigned long long>(up_to + 3, 6), Poly(p));
    P[0] = Poly::zero(p);
    P[1] = Poly::one(p);
    P[2] = Poly::constant(Fp(2, p));
    P[3] = Poly(p, {-(A * A), B * Fp(12, p), A * Fp(6, p), Fp(0, p), Fp(3, p)});
    P[4] = Poly(p, {-(B * B * Fp(8, p)) - A * A * A, -(A * B * Fp(4, p)), -(A * A * Fp(5, p)),
                    B * Fp(20, p), A * Fp(5, p), Fp(0, p), Fp(1, p)}) *
           Fp(4, p);
    Fp inv2 = Fp(2, p).inv();
    Poly F2 = F * F;
    for (unsigned long long m = 2; 2 * m + 1 <= up_to + 1; ++m) {
        if (2 * m + 1 < P.size()) {
            P[2 * m + 1] = m % 2 == 0 ? F2 * P[m + 2] * P[m] * P[m] * P[m] -
                                            P[m - 1] * P[m + 1] * P[m + 1] * P[m + 1]
                                      : P[m + 2] * P[m] * P[m] * P[m] -
                                            F2 * P[m - 1] * P[m + 1] * P[m + 1] * P[m + 1];
        }
        if (2 * m < P.size()) {
            P[2 * m] =
                P[m] * (P[m + 2] * P[m - 1] * P[m - 1] - P[m - 2] * P[m + 1] * P[m + 1]) * inv2;
        }
    }
    return P;
}

// Does h divide the ell-division polynomial (i.e. do its roots consist of
// x-coordinates of ell-torsion points)?
inline bool divides_division_poly(const WeierstrassCurve& E, const Poly& h,
                                  unsigned long long ell) {
    std::uint64_t p = E.modulus();
    Fp three(3, p);
    // shift x = xs - c into short form y^2 = xs^3 + A xs + B
    Fp c = E.a2 * three.inv();
    Fp A = E.a4 - E.a2 * E.a2 * three.inv();
    Fp B = E.rhs(-c);
    auto P = division_polys(A, B, ell);
    Poly hs = h.shift(-c);  // roots shift by +c: h_short(xs) = h(xs - c)
    return (P[ell] % hs).is_zero();
}

// Velu/Kohel: codomain of the odd-degree isogeny with kernel polynomial h
// (monic, vanishing on the x-coordinates of the nonzero kernel points, one
// per +- pair).
inline WeierstrassCurve velu_isogeny(const WeierstrassCurve& E, const Poly& h) {
    std::uint64_t p = E.modulus();
    if (h.degree() < 1) throw invalid_kernel("kernel polynomial must be nonconstant (ell >= 3)");
    if (!h.is_monic()) throw invalid_kernel("kernel polynomial must be monic");
    unsigned long long ell = 2 * static_cast<unsigned long long>(h.degree()) + 1;
    if (!divides_division_poly(E, h, ell))
        throw invalid_kernel("kernel polynomial does not divide the division polynomial");
    Fp three(3, p);
    Fp c = E.a2 * three.inv();
    Fp A = E.a4 - E.a2 * E.a2 * three.inv();
    Fp B = E.rhs(-c);
    Poly hs = h.shift(-c);
    // power sums of the kernel abscissae from the coefficients of hs
    long long d = hs.degree();
    Fp e1 = -hs.coeff(static_cast<std::size_t>(d - 1));
    Fp e2 = d >= 2 ? hs.coeff(static_cast<std::size_t>(d - 2)) : Fp(0, p);
    Fp e3 = d >= 3 ? -hs.coeff(static_cast<std::size_t>(d - 3)) : Fp(0, p);
    Fp p1 = e1;
    Fp p2 = e1 * p1 - e2 * Fp(2, p);
    Fp p3 = e1 * p2 - e2 * p1 + e3 * Fp(3, p);
    Fp dd(static_cast<std::uint64_t>(d) % p, p);
    Fp v = p2 * Fp(6, p) + A * dd * Fp(2, p);
    Fp w = p3 * Fp(10, p) + A * p1 * Fp(6, p) + B * dd * Fp(4, p);
    Fp A2 = A - v * Fp(5, p);
    Fp B2 = B - w * Fp(7, p);
    return WeierstrassCurve{Fp(0, p), A2, B2};
}

// ---------------------------------------------------------------------------
// Level-2 theta <-> Weierstrass dictionary for g = 1, pinned by the two
// worked pairs over F_1009. The null point (a : b) determines the Legendre
// parameter lambda = ((a^2-b^2)/(a^2+b^2))^2 of the curve class, and the
// Kummer coordinate u = theta_1/theta_0 maps to the Legendre abscissa by a
// Moebius transformation fixed by the 2-torsion translation structure.
// ---------------------------------------------------------------------------

inline Fp legendre_lambda_from_null(const Fp& a, const Fp& b) {
    Fp s = a * a + b * b, d = a * a - b * b;
    if (s.is_zero() || d.is_zero()) throw degenerate_input("degenerate level-2 null point");
    Fp r = d * s.inv();
    Fp lam = r * r;
    std::uint64_t p = a.modulus();
    if (lam.is_zero() || lam == Fp(1, p)) throw degenerate_input("degenerate lambda");
    return lam;
}

inline WeierstrassCurve theta_null_to_curve(const Fp& a, const Fp& b) {
    std::uint64_t p = a.modulus();
    Fp lam = legendre_lambda_from_null(a, b);
    return WeierstrassCurve{-(Fp(1, p) + lam), lam, Fp(0, p)};
}

// u = theta_1/theta_0 -> Legendre x; poles/zeros: u(0_E) = b/a -> infinity.
inline Fp theta_u_to_legendre_x(const Fp& u, const Fp& a, const Fp& b) {
    Fp s = a * a + b * b, d = a * a - b * b;
    Fp den = (a * u - b) * s;
    if (den.is_zero()) throw degenerate_input("u is the zero point");
    return (a * u + b) * d * den.inv();
}

inline Fp legendre_x_to_theta_u(const Fp& x, const Fp& a, const Fp& b) {
    Fp s = a * a + b * b, d = a * a - b * b;
    Fp den = a * (s * x - d);
    if (den.is_zero()) throw degenerate_input("x maps to the point at infinity of the u-line");
    return b * (s * x + d) * den.inv();
}

// Kernel dictionary: the squarefree half polynomial Q(U) over the Kummer
// coordinate maps to the Velu kernel x-polynomial on the Legendre model,
// computed without root extraction via resultants.
inline Poly kernel_x_poly_from_theta(const Poly& Q, const Fp& a, const Fp& b) {
    std::uint64_t p = Q.modulus();
    Fp s = a * a + b * b, d = a * a - b * b;
    int m = Q.degree();
    if (m < 1) throw invalid_kernel("empty kernel polynomial");
    std::vector<Fp> xs, ys;
    Fp pole = d * s.inv();  // X value where the U-leading coefficient vanishes
    for (std::uint64_t v = 0; static_cast<int>(xs.size()) < m + 1; ++v) {
        Fp X(v, p);
        if (X == pole) continue;
        // L(U) = (a U - b) s X - (a U + b) d, linear in U
        Poly L(p, {-(b * s * X) - b * d, a * s * X - a * d});
        xs.push_back(X);
        ys.push_back(resultant(Q, L));
    }
    Poly h = interpolate(xs, ys);
    if (h.degree() != m) throw invalid_kernel("kernel polynomial degenerates under the dictionary");
    return h.monic();
}

}  // namespace theta
