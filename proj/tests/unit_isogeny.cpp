#include <catch2/catch_amalgamated.hpp>

#include "theta/isogeny.hpp"

using namespace theta;

namespace {
constexpr std::uint64_t P = 1009;

ThetaNullPoint sec7_null() {
    return ThetaNullPoint(IndexGroup(1, 2), {Fp(971, P), Fp(94, P)});
}

KernelDescriptor sec7_kernel() {
    KernelDescriptor kd;
    kd.ell = 5;
    kd.convention = KernelConvention::kummer_half;
    kd.Q = Poly::from_coeffs(P, {353, 746, 1});
    kd.coords = {Poly::one(P), Poly::unknown(P)};
    return kd;
}
}  // namespace

TEST_CASE("section 7 lambda relation") {
    auto null = sec7_null();
    auto K = std::make_shared<EtaleAlgebra>(Poly::from_coeffs(P, {353, 746, 1}));
    auto kd = sec7_kernel();
    auto I = formal_point(kd, K);
    AlgebraElem lam5 = kernel_lambda_relation(I, null, 5);
    CHECK(lam5 == AlgebraElem(K, Poly::from_coeffs(P, {129, 126})));
}

TEST_CASE("section 7 codomain null point") {
    auto null = sec7_null();
    IsogenyEngine eng(null, sec7_kernel());
    auto raw = eng.codomain_null_raw();
    CHECK(raw[0] == Fp(186, P));
    CHECK(raw[1] == Fp(513, P));
    CHECK(eng.diagnostics().exponent_checks > 0);
    auto norm = normalize_projective(raw);
    CHECK(norm[0] == Fp(1, P));
    CHECK(norm[1] == Fp(513, P) * Fp(186, P).inv());
}

TEST_CASE("full and punctured conventions agree with the kummer half") {
    auto null = sec7_null();
    // raw quintic input (full, on the Kummer variety)
    KernelDescriptor raw;
    raw.ell = 5;
    raw.convention = KernelConvention::full;
    raw.Q = Poly::from_coeffs(P, {339, 660, 447, 546, 751, 1});
    raw.coords = {Poly::one(P), Poly::unknown(P)};
    IsogenyEngine eng(null, raw);
    auto out = eng.codomain_null_raw();
    CHECK(out[0] == Fp(186, P));
    CHECK(out[1] == Fp(513, P));
}

TEST_CASE("reduce_value enforces divisibility") {
    auto K = std::make_shared<EtaleAlgebra>(Poly::from_coeffs(P, {353, 746, 1}));
    ParamRelations<AlgebraElem> rel{5, {AlgebraElem::embed(K, Fp(2, P))}};
    AlgebraElem v = AlgebraElem::embed(K, Fp(3, P));
    CHECK(reduce_value(v, {10}, rel) == AlgebraElem::embed(K, Fp(12, P)));
    CHECK(reduce_value(v, {-5}, rel) == AlgebraElem::embed(K, Fp(3, P)) * Fp(2, P).inv());
    CHECK_THROWS_AS(reduce_value(v, {7}, rel), internal_error);
}

TEST_CASE("kummer-half level-2 images are rejected") {
    auto null = sec7_null();
    IsogenyEngine eng(null, sec7_kernel());
    CHECK_THROWS_AS(eng.image_raw({Fp(1, P), Fp(2, P)}), unsupported_level);
}
