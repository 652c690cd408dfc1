#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "decompose.hpp"
#include "kernel.hpp"

namespace theta {

// param^ell = value for each live formal parameter slot.
template <class R>
struct ParamRelations {
    unsigned long long ell = 0;
    std::vector<std::optional<R>> value;
};

// Substitute the normalization relations into a tracked value: multiply by
// prod_i c_i^{e_i / ell}. Every exponent must be a multiple of ell; this is
// Prop "R lies in B" made assertable.
template <class R>
R reduce_value(R v, const std::vector<long long>& exps, const ParamRelations<R>& rel,
               std::atomic<long long>* checks = nullptr) {
    for (std::size_t i = 0; i < exps.size(); ++i) {
        long long e = exps[i];
        if (checks) ++*checks;
        if (e == 0) continue;
        if (e % static_cast<long long>(rel.ell) != 0)
            throw internal_error("formal exponent " + std::to_string(e) +
                                 " is not a multiple of ell");
        if (i >= rel.value.size() || !rel.value[i])
            throw internal_error("missing normalization relation for a live parameter");
        long long k = e / static_cast<long long>(rel.ell);
        R c = *rel.value[i];
        if (k < 0) {
            c = c.inv();
            k = -k;
        }
        v = v * c.pow(static_cast<std::uint64_t>(k));
    }
    return v;
}

// lambda^ell from equation compat1: ((l'+1) B)_nu lambda^ell = (l' B)_{-nu}.
// nu = 0 preferred; all usable nu must agree.
template <class R>
R kernel_lambda_relation(const AffinePoint<R>& base, const ThetaNullPoint& null,
                         unsigned long long ell, bool crosscheck = true) {
    unsigned long long lp = (ell - 1) / 2;
    auto [lo, hi] = ladder_pair(lp, base, null);
    const IndexGroup& idx = null.index();
    std::optional<R> val;
    for (std::size_t nu = 0; nu < idx.size(); ++nu) {
        R cand = hi.coords[nu];
        try {
            cand = lo.coords[idx.neg(nu)] * hi.coords[nu].inv();
        } catch (const zero_divisor_error&) {
            continue;
        }
        if (!val) {
            val = cand;
            if (!crosscheck) break;
        } else if (!(*val == cand)) {
            throw internal_error("lambda relation differs between coordinates");
        }
    }
    if (!val) throw degenerate_input("no usable coordinate for the lambda relation");
    return *val;
}

// Algorithm Normalize: mu^ell from ScalarMult(ell, eta, lambda*base, anchor),
// eliminating the known lambda-powers through the relations already solved.
template <class R>
R normalize_sum_relation(const AffinePoint<R>& eta, const AffinePoint<R>& kernel_base,
                         const AffinePoint<R>& anchor, std::size_t mu_slot,
                         const ThetaNullPoint& null, const ParamRelations<R>& rel,
                         unsigned long long ell, std::atomic<long long>* checks = nullptr) {
    AffinePoint<R> m0 = ladder(ell, eta, kernel_base, anchor, null);
    if (m0.exps[mu_slot] != static_cast<long long>(ell))
        throw internal_error("Normalize: mu exponent is not ell");
    std::vector<long long> others = m0.exps;
    others[mu_slot] = 0;
    for (auto& e : others) e = -e;
    const IndexGroup& idx = null.index();
    for (std::size_t nu = 0; nu < idx.size(); ++nu) {
        if (anchor.coords[nu].is_zero()) continue;
        R cinv = m0.coords[nu];
        try {
            cinv = m0.coords[nu].inv();
        } catch (const zero_divisor_error&) {
            continue;
        }
        return reduce_value(anchor.coords[nu] * cinv, others, rel, checks);
    }
    throw degenerate_input("Normalize: no usable coordinate");
}

struct EngineOptions {
    int force_r = 0;
    bool three_way = false;
    int jobs = 1;
    bool crosscheck = true;
};

struct IsogenyDiagnostics {
    SquareDecomposition dec;
    int splits = 0;
    long long exponent_checks = 0;
    unsigned long long N = 1;
    std::vector<std::string> notes;
    double normalize_ms = 0, assembly_ms = 0;
};

// End-to-end pipeline: codomain theta null point and image points via the
// Koizumi change of level, evaluated by the trace lemma over k[U]/(Q).
class IsogenyEngine {
  public:
    IsogenyEngine(ThetaNullPoint null, KernelDescriptor kd, EngineOptions opt = {})
        : null_(std::move(null)), opt_(opt) {
        kd_ = canonicalize_kernel(std::move(kd), null_);
        check_kernel_shape(kd_, null_);
        dec_ = decompose(kd_.ell, null_.index().n(), opt_.force_r);
        diag_.dec = dec_;
        diag_.N = dec_.N_for_g(null_.index().g());
    }

    const KernelDescriptor& kernel() const { return kd_; }
    const SquareDecomposition& decomposition() const { return dec_; }
    const IsogenyDiagnostics& diagnostics() const { return diag_; }

    // Raw Koizumi products (theta_k^B theta_0^B ... theta_0^B)_k.
    std::vector<Fp> codomain_null_raw() {
        auto t0 = std::chrono::steady_clock::now();
        const IndexGroup& idx = null_.index();
        const std::uint64_t p = null_.modulus_p();
        if (dec_.r == 4 && idx.n() % 4 != 0)
            throw unsupported_level("r = 4 needs 4 | n (formal normal addition)");
        if (dec_.r == 4 && kd_.convention == KernelConvention::kummer_half)
            throw unsupported_level("kummer_half kernels only support r <= 2");
        if (dec_.r == 2 && !dec_.beta0_valid)
            throw unsupported_level("r = 2 needs beta0 = -b/a to exist mod ell");

        std::vector<Fp> traces(idx.size(), Fp(0, p));
        if (dec_.r <= 2) {
            run_arity1([&](const AlgebraPtr& K) { accumulate_null_r12(K, traces); }, kd_.Q);
        } else {
            run_tensor([&](const TensorPtr& B) { accumulate_null_r4(B, traces); });
            if (kd_.convention == KernelConvention::punctured) {
                std::vector<Fp> trA(idx.size(), Fp(0, p)), trB(idx.size(), Fp(0, p));
                run_arity1([&](const AlgebraPtr& K) { accumulate_null_r4_stratum(K, trA, trB); },
                           kd_.Q);
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    auto j = leg_indices(k);
                    traces[k] += trA[k] * null_.coords()[j[1]] + trB[k] * null_.coords()[j[0]];
                }
            }
        }
        std::vector<Fp> out(idx.size(), Fp(0, p));
        Fp ninv = Fp(diag_.N % p, p).inv();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Fp total = traces[k];
            if (kd_.convention == KernelConvention::kummer_half) total = total + total;
            if (kd_.convention != KernelConvention::full) {
                Fp z(1, p);
                for (auto j : leg_indices(k)) z *= null_.coords()[j];
                total += z;
            }
            out[k] = total * ninv;
        }
        diag_.assembly_ms += ms_since(t0);
        return out;
    }

    // Raw products (theta_k^B(ell z_P) theta_0^B(0)^{r-1})_k for a projective
    // input point over F_p.
    std::vector<Fp> image_raw(const std::vector<Fp>& P) {
        const IndexGroup& idx = null_.index();
        const std::uint64_t p = null_.modulus_p();
        if (idx.n() % 4 != 0)
            throw unsupported_level("image computation needs 4 | n "
                                    "(level-2 images would need square roots in K)");
        if (P.size() != idx.size()) throw usage_error("point has wrong coordinate count");
        if (kd_.convention == KernelConvention::kummer_half)
            throw unsupported_level("kummer_half kernels only compute the codomain null point");
        if (dec_.r >= 2 && dec_.ell1 != 1)
            throw unsupported_level("images with r >= 2 need squarefree ell here");
        if (dec_.r == 4 && kd_.convention != KernelConvention::full)
            throw unsupported_level("r = 4 images need a full kernel");

        auto t0 = std::chrono::steady_clock::now();
        AffinePoint<Fp> Pfp{P, {}};
        std::vector<Fp> traces(idx.size(), Fp(0, p));
        std::vector<long long> mults = image_multiples();
        if (dec_.r <= 2) {
            run_arity1([&](const AlgebraPtr& K) { accumulate_image_r12(K, Pfp, mults, traces); },
                       kd_.Q);
        } else {
            run_tensor([&](const TensorPtr& B) { accumulate_image_r4(B, Pfp, traces); });
        }
        std::vector<AffinePoint<Fp>> strata_legs;
        if (kd_.convention == KernelConvention::punctured && dec_.r <= 2)
            for (int s = 0; s < dec_.r; ++s)
                strata_legs.push_back(
                    scalar_mult_signed(mults[static_cast<std::size_t>(s)], Pfp, null_));
        std::vector<Fp> out(idx.size(), Fp(0, p));
        Fp ninv = Fp(diag_.N % p, p).inv();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            Fp total = traces[k];
            if (!strata_legs.empty()) {
                // T = 0 stratum: compatible lifts of the pure P-multiples
                Fp z(1, p);
                auto j = leg_indices(k);
                for (int s = 0; s < dec_.r; ++s)
                    z *= strata_legs[static_cast<std::size_t>(s)]
                             .coords[j[static_cast<std::size_t>(s)]];
                total += z;
            }
            out[k] = total * ninv;
        }
        diag_.assembly_ms += ms_since(t0);
        return out;
    }

  private:
    static double ms_since(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }

    // j_s(k) = k * (M^{-1})_{1s} as an element of (Z/n)^g
    std::vector<std::size_t> leg_indices(std::size_t k) const {
        const IndexGroup& idx = null_.index();
        std::vector<std::size_t> j(static_cast<std::size_t>(dec_.r));
        for (int s = 0; s < dec_.r; ++s)
            j[static_cast<std::size_t>(s)] =
                idx.scale(k, dec_.M_inv_n[0][static_cast<std::size_t>(s)]);
        return j;
    }

    // work queue over the CRT components of Q, refining on splits
    template <class F>
    void run_arity1(F&& body, const Poly& q0) {
        std::vector<Poly> queue = {q0.monic()};
        int guard = 0;
        while (!queue.empty()) {
            if (++guard > 8 * q0.degree() + 16) throw internal_error("split refinement loop");
            Poly q = queue.back();
            queue.pop_back();
            try {
                auto K = std::make_shared<EtaleAlgebra>(q);
                body(K);
            } catch (const split_discovered& s) {
                ++diag_.splits;
                Poly f = s.u_factor.monic();
                queue.push_back(f);
                queue.push_back((q / f).monic());
            }
        }
    }

    template <class F>
    void run_tensor(F&& body) {
        auto K = std::make_shared<EtaleAlgebra>(kd_.Q);
        std::vector<TensorPtr> queue;
        TensorPtr whole = TensorAlgebra::make(K);
        for (std::size_t i = 0; i < whole->component_count(); ++i)
            queue.push_back(whole->single_component(i));
        int guard = 0;
        while (!queue.empty()) {
            if (++guard > 16 * kd_.Q.degree() * kd_.Q.degree() + 32)
                throw internal_error("tensor split refinement loop");
            TensorPtr B = queue.back();
            queue.pop_back();
            try {
                body(B);
            } catch (const split_discovered& s) {
                ++diag_.splits;
                TensorPtr refined = s.is_v_side() ? B->refine_v(s.component, s.v_factor)
                                                  : B->refine_u(s.component, s.u_factor);
                for (std::size_t i = 0; i < refined->component_count(); ++i)
                    queue.push_back(refined->single_component(i));
            }
        }
    }

    template <class R, class F>
    void per_k_loop(std::size_t size, F&& fn) const {
        int jobs = opt_.jobs;
        if (jobs <= 1 || size <= 1) {
            for (std::size_t k = 0; k < size; ++k) fn(k);
            return;
        }
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < size; k = next.fetch_add(1)) fn(k);
            });
        for (auto& th : pool) th.join();
    }

    // ---- codomain null, r in {1, 2} -------------------------------------
    void accumulate_null_r12(const AlgebraPtr& K, std::vector<Fp>& traces) {
        const IndexGroup& idx = null_.index();
        auto t0 = std::chrono::steady_clock::now();
        auto I = formal_point(kd_, K, 1, 0);
        ParamRelations<AlgebraElem> rel{kd_.ell, {std::nullopt}};
        std::atomic<long long> checks{0};
        rel.value[0] = kernel_lambda_relation(I, null_, kd_.ell, opt_.crosscheck);
        std::vector<AffinePoint<AlgebraElem>> legs;
        legs.push_back(dec_.sqrt_ell1 == 1 ? I : scalar_mult(dec_.sqrt_ell1, I, null_));
        if (dec_.r == 2) legs.push_back(scalar_mult(dec_.beta0, legs[0], null_));
        diag_.normalize_ms += ms_since(t0);

        std::vector<Fp> local(idx.size(), Fp(0, null_.modulus_p()));
        per_k_loop<AlgebraElem>(idx.size(), [&](std::size_t k) {
            auto j = leg_indices(k);
            AlgebraElem prod = legs[0].coords[j[0]];
            std::vector<long long> exps = legs[0].exps;
            for (std::size_t s = 1; s < legs.size(); ++s) {
                prod = prod * legs[s].coords[j[s]];
                for (std::size_t i = 0; i < exps.size(); ++i) exps[i] += legs[s].exps[i];
            }
            local[k] = trace_sum(reduce_value(prod, exps, rel, &checks));
        });
        for (std::size_t k = 0; k < idx.size(); ++k) traces[k] += local[k];
        diag_.exponent_checks += checks.load();
    }

    // ---- codomain null, r = 4 -------------------------------------------
    void accumulate_null_r4(const TensorPtr& B, std::vector<Fp>& traces) {
        const IndexGroup& idx = null_.index();
        const std::uint64_t p = null_.modulus_p();
        auto t0 = std::chrono::steady_clock::now();
        std::atomic<long long> checks{0};

        auto mk_point = [&](bool second, std::size_t slot) {
            AffinePoint<TensorElem> pt;
            pt.coords.reserve(idx.size());
            for (const auto& c : kd_.coords)
                pt.coords.push_back(second ? TensorElem::embed_second(B, c)
                                           : TensorElem::embed_first(B, c));
            pt.exps.assign(3, 0);
            pt.exps[slot] = 1;
            return pt;
        };
        AffinePoint<TensorElem> I1 = mk_point(false, 0);
        AffinePoint<TensorElem> I2 = mk_point(true, 1);
        ParamRelations<TensorElem> rel{kd_.ell, {std::nullopt, std::nullopt, std::nullopt}};
        rel.value[0] = kernel_lambda_relation(I1, null_, kd_.ell, opt_.crosscheck);
        rel.value[1] = kernel_lambda_relation(I2, null_, kd_.ell, opt_.crosscheck);
        AffinePoint<TensorElem> I12 = normal_add(I1, I2, null_);
        I12.exps = {0, 0, 1};
        rel.value[2] = kernel_lambda_relation(I12, null_, kd_.ell, opt_.crosscheck);

        AffinePoint<TensorElem> L1 = dec_.sqrt_ell1 == 1 ? I1 : scalar_mult(dec_.sqrt_ell1, I1, null_);
        AffinePoint<TensorElem> L2 = dec_.sqrt_ell1 == 1 ? I2 : scalar_mult(dec_.sqrt_ell1, I2, null_);
        AffinePoint<TensorElem> E12 =
            dec_.sqrt_ell1 == 1 ? I12 : scalar_mult(dec_.sqrt_ell1, I12, null_);
        AffinePoint<TensorElem> W = ladder(dec_.alpha, E12, L1, L2, null_);
        AffinePoint<TensorElem> aux = scalar_mult(dec_.alpha, L1, null_);
        AffinePoint<TensorElem> L3 = ladder(dec_.beta, W, L2, aux, null_);
        AffinePoint<TensorElem> W2 = ladder(dec_.gamma, E12, L1, L2, null_);
        AffinePoint<TensorElem> aux2 = scalar_mult(dec_.gamma, L1, null_);
        AffinePoint<TensorElem> L4 = ladder(dec_.delta, W2, L2, aux2, null_);
        diag_.normalize_ms += ms_since(t0);

        const AffinePoint<TensorElem>* legs[4] = {&L1, &L2, &L3, &L4};
        std::vector<Fp> local(idx.size(), Fp(0, p));
        per_k_loop<TensorElem>(idx.size(), [&](std::size_t k) {
            auto j = leg_indices(k);
            TensorElem prod = legs[0]->coords[j[0]];
            std::vector<long long> exps = legs[0]->exps;
            for (int s = 1; s < 4; ++s) {
                prod = prod * legs[s]->coords[j[static_cast<std::size_t>(s)]];
                for (std::size_t i = 0; i < exps.size(); ++i)
                    exps[i] += legs[s]->exps[i];
            }
            local[k] = tensor_trace_sum(reduce_value(prod, exps, rel, &checks));
        });
        for (std::size_t k = 0; k < idx.size(); ++k) traces[k] += local[k];
        diag_.exponent_checks += checks.load();
    }

    // strata with one tensor slot at the zero point (punctured kernels)
    void accumulate_null_r4_stratum(const AlgebraPtr& K, std::vector<Fp>& trA,
                                    std::vector<Fp>& trB) {
        const IndexGroup& idx = null_.index();
        std::atomic<long long> checks{0};
        auto I = formal_point(kd_, K, 1, 0);
        ParamRelations<AlgebraElem> rel{kd_.ell, {std::nullopt}};
        rel.value[0] = kernel_lambda_relation(I, null_, kd_.ell, opt_.crosscheck);
        AffinePoint<AlgebraElem> L = dec_.sqrt_ell1 == 1 ? I : scalar_mult(dec_.sqrt_ell1, I, null_);
        // T2 = 0: legs (1, ., alpha, gamma); T1 = 0: legs (., 1, beta, delta)
        AffinePoint<AlgebraElem> A3 = scalar_mult(dec_.alpha, L, null_);
        AffinePoint<AlgebraElem> A4 = scalar_mult(dec_.gamma, L, null_);
        AffinePoint<AlgebraElem> B3 = scalar_mult(dec_.beta, L, null_);
        AffinePoint<AlgebraElem> B4 = scalar_mult(dec_.delta, L, null_);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            auto j = leg_indices(k);
            AlgebraElem a = L.coords[j[0]] * A3.coords[j[2]] * A4.coords[j[3]];
            std::vector<long long> ea = {L.exps[0] + A3.exps[0] + A4.exps[0]};
            trA[k] += trace_sum(reduce_value(a, ea, rel, &checks));
            AlgebraElem b = L.coords[j[1]] * B3.coords[j[2]] * B4.coords[j[3]];
            std::vector<long long> eb = {L.exps[0] + B3.exps[0] + B4.exps[0]};
            trB[k] += trace_sum(reduce_value(b, eb, rel, &checks));
        }
        diag_.exponent_checks += checks.load();
    }

    // the exact integer multiples of P carried by each leg
    std::vector<long long> image_multiples() const {
        long long ell = static_cast<long long>(kd_.ell);
        if (dec_.r == 1) return {static_cast<long long>(dec_.sqrt_ell1)};
        if (dec_.r == 2) {
            // m1 a - m2 b = ell with m1, m2 >= 0 and gcd(m1, ell) = 1
            long long a = dec_.a, b = dec_.b;
            if (std::__gcd(a, b) != 1)
                throw unsupported_level("image: two-square decomposition is not primitive");
            long long x = 0, y = 0;
            long long g = ext_gcd(a, b, x, y);  // x a + y b = 1
            (void)g;
            long long m1 = x * ell, m2 = -y * ell;  // m1 a - m2 b = ell
            while (m1 < 0 || m2 < 0 || std::__gcd((m1 % ell + ell) % ell, ell) != 1) {
                m1 += b;
                m2 += a;
                if (m1 > 64 * ell * (std::max(a, b) + 1))
                    throw internal_error("image multiple search failed");
            }
            return {m1, m2};
        }
        // r = 4: hats alpha..delta congruent mod ell with X3 = ah z1 + bh z2
        // etc., and z1 A + z2 B = 1 enforcing Y1 = ell z_P exactly
        long long a = dec_.a, b = dec_.b, c = dec_.c, d = dec_.d;
        for (long long s1 = 0; s1 < 8; ++s1)
            for (long long s2 = 0; s2 < 8; ++s2)
                for (long long s3 = 0; s3 < 8; ++s3)
                    for (long long s4 = 0; s4 < 8; ++s4) {
                        long long ah = static_cast<long long>(dec_.alpha) + s1 * ell;
                        long long bh = static_cast<long long>(dec_.beta) + s2 * ell;
                        long long gh = static_cast<long long>(dec_.gamma) + s3 * ell;
                        long long dh = static_cast<long long>(dec_.delta) + s4 * ell;
                        long long A = a + c * ah + d * gh;
                        long long Bc = b + c * bh + d * dh;
                        if (A % ell || Bc % ell) throw internal_error("r4 multiple residue");
                        long long A1 = A / ell, B1 = Bc / ell;
                        if (A1 == 0 && B1 == 0) continue;
                        long long z1 = 0, z2 = 0;
                        long long g = ext_gcd(A1, B1, z1, z2);
                        if (g != 1 && g != -1) continue;
                        if (g == -1) { z1 = -z1; z2 = -z2; }
                        return {z1, z2, ah, bh, gh, dh};
                    }
        throw unsupported_level("image: no exact multiple configuration found");
    }

    static long long ext_gcd(long long a, long long b, long long& x, long long& y) {
        if (b == 0) {
            x = a >= 0 ? 1 : -1;
            y = 0;
            return a >= 0 ? a : -a;
        }
        long long x1, y1;
        long long g = ext_gcd(b, a % b, x1, y1);
        x = y1;
        y = x1 - (a / b) * y1;
        return g;
    }

    // ---- image, r in {1, 2} ----------------------------------------------
    void accumulate_image_r12(const AlgebraPtr& K, const AffinePoint<Fp>& Pfp,
                              const std::vector<long long>& mults, std::vector<Fp>& traces) {
        const IndexGroup& idx = null_.index();
        const std::uint64_t p = null_.modulus_p();
        auto t0 = std::chrono::steady_clock::now();
        std::atomic<long long> checks{0};
        // params: 0 = lambda (kernel), 1 = mu (sum)
        auto I = formal_point(kd_, K, 2, 0);
        ParamRelations<AlgebraElem> rel{kd_.ell, {std::nullopt, std::nullopt}};
        rel.value[0] = kernel_lambda_relation(I, null_, kd_.ell, opt_.crosscheck);
        AffinePoint<AlgebraElem> Pt;
        Pt.coords.reserve(idx.size());
        for (const auto& c : Pfp.coords) Pt.coords.push_back(AlgebraElem::embed(K, c));
        Pt.exps.assign(2, 0);
        AffinePoint<AlgebraElem> eta0 = normal_add(I, Pt, null_);
        eta0.exps = {0, 1};
        rel.value[1] = normalize_sum_relation(eta0, I, Pt, 1, null_, rel, kd_.ell, &checks);

        std::vector<AffinePoint<AlgebraElem>> legs;
        for (std::size_t s = 0; s < mults.size(); ++s)
            legs.push_back(scalar_mult(static_cast<unsigned long long>(mults[s]), eta0, null_));
        diag_.normalize_ms += ms_since(t0);

        std::vector<Fp> local(idx.size(), Fp(0, p));
        per_k_loop<AlgebraElem>(idx.size(), [&](std::size_t k) {
            auto j = leg_indices(k);
            AlgebraElem prod = legs[0].coords[j[0]];
            std::vector<long long> exps = legs[0].exps;
            for (std::size_t s = 1; s < legs.size(); ++s) {
                prod = prod * legs[s].coords[j[s]];
                for (std::size_t i = 0; i < exps.size(); ++i) exps[i] += legs[s].exps[i];
            }
            local[k] = trace_sum(reduce_value(prod, exps, rel, &checks));
        });
        for (std::size_t k = 0; k < idx.size(); ++k) traces[k] += local[k];
        diag_.exponent_checks += checks.load();
    }

    // ---- image, r = 4 (full kernels) --------------------------------------
    void accumulate_image_r4(const TensorPtr& B, const AffinePoint<Fp>& Pfp,
                             std::vector<Fp>& traces) {
        const IndexGroup& idx = null_.index();
        const std::uint64_t p = null_.modulus_p();
        auto t0 = std::chrono::steady_clock::now();
        std::atomic<long long> checks{0};
        std::vector<long long> ms = image_multiples();
        long long z1 = ms[0], z2 = ms[1];
        unsigned long long ah = static_cast<unsigned long long>(ms[2]);
        unsigned long long bh = static_cast<unsigned long long>(ms[3]);
        unsigned long long gh = static_cast<unsigned long long>(ms[4]);
        unsigned long long dh = static_cast<unsigned long long>(ms[5]);

        // params: 0 lambda1, 1 lambda2, 2 lambda12, 3 mu1, 4 mu2, 5 mu12
        auto mk_point = [&](bool second, std::size_t slot) {
            AffinePoint<TensorElem> pt;
            pt.coords.reserve(idx.size());
            for (const auto& c : kd_.coords)
                pt.coords.push_back(second ? TensorElem::embed_second(B, c)
                                           : TensorElem::embed_first(B, c));
            pt.exps.assign(6, 0);
            pt.exps[slot] = 1;
            return pt;
        };
        auto embed_fp = [&](const AffinePoint<Fp>& q) {
            AffinePoint<TensorElem> pt;
            pt.coords.reserve(idx.size());
            for (const auto& c : q.coords) pt.coords.push_back(TensorElem::embed(B, c));
            pt.exps.assign(6, 0);
            return pt;
        };
        AffinePoint<TensorElem> I1 = mk_point(false, 0);
        AffinePoint<TensorElem> I2 = mk_point(true, 1);
        ParamRelations<TensorElem> rel{kd_.ell, std::vector<std::optional<TensorElem>>(6)};
        rel.value[0] = kernel_lambda_relation(I1, null_, kd_.ell, opt_.crosscheck);
        rel.value[1] = kernel_lambda_relation(I2, null_, kd_.ell, opt_.crosscheck);
        AffinePoint<TensorElem> I12 = normal_add(I1, I2, null_);
        I12.exps.assign(6, 0);
        I12.exps[2] = 1;
        rel.value[2] = kernel_lambda_relation(I12, null_, kd_.ell, opt_.crosscheck);

        AffinePoint<Fp> z1P = scalar_mult_signed(z1, Pfp, null_);
        AffinePoint<Fp> z2P = scalar_mult_signed(z2, Pfp, null_);
        AffinePoint<Fp> z12P = scalar_mult_signed(z1 + z2, Pfp, null_);
        AffinePoint<TensorElem> anchor1 = embed_fp(z1P), anchor2 = embed_fp(z2P),
                                anchor12 = embed_fp(z12P);

        AffinePoint<TensorElem> eta1 = normal_add(I1, anchor1, null_);
        eta1.exps.assign(6, 0);
        eta1.exps[3] = 1;
        AffinePoint<TensorElem> eta2 = normal_add(I2, anchor2, null_);
        eta2.exps.assign(6, 0);
        eta2.exps[4] = 1;
        AffinePoint<TensorElem> eta12 = normal_add(eta1, eta2, null_);
        eta12.exps.assign(6, 0);
        eta12.exps[5] = 1;
        rel.value[3] = normalize_sum_relation(eta1, I1, anchor1, 3, null_, rel, kd_.ell, &checks);
        rel.value[4] = normalize_sum_relation(eta2, I2, anchor2, 4, null_, rel, kd_.ell, &checks);
        rel.value[5] =
            normalize_sum_relation(eta12, I12, anchor12, 5, null_, rel, kd_.ell, &checks);

        AffinePoint<TensorElem> W = ladder(ah, eta12, eta1, eta2, null_);
        AffinePoint<TensorElem> aux = scalar_mult(ah, eta1, null_);
        AffinePoint<TensorElem> L3 = ladder(bh, W, eta2, aux, null_);
        AffinePoint<TensorElem> W2 = ladder(gh, eta12, eta1, eta2, null_);
        AffinePoint<TensorElem> aux2 = scalar_mult(gh, eta1, null_);
        AffinePoint<TensorElem> L4 = ladder(dh, W2, eta2, aux2, null_);
        diag_.normalize_ms += ms_since(t0);

        const AffinePoint<TensorElem>* legs[4] = {&eta1, &eta2, &L3, &L4};
        std::vector<Fp> local(idx.size(), Fp(0, p));
        per_k_loop<TensorElem>(idx.size(), [&](std::size_t k) {
            auto j = leg_indices(k);
            TensorElem prod = legs[0]->coords[j[0]];
            std::vector<long long> exps = legs[0]->exps;
            for (int s = 1; s < 4; ++s) {
                prod = prod * legs[s]->coords[j[static_cast<std::size_t>(s)]];
                for (std::size_t i = 0; i < exps.size(); ++i)
                    exps[i] += legs[s]->exps[i];
            }
            local[k] = tensor_trace_sum(reduce_value(prod, exps, rel, &checks));
        });
        for (std::size_t k = 0; k < idx.size(); ++k) traces[k] += local[k];
        diag_.exponent_checks += checks.load();
    }

    ThetaNullPoint null_;
    KernelDescriptor kd_;
    SquareDecomposition dec_;
    EngineOptions opt_;
    IsogenyDiagnostics diag_;
};

// First-nonzero-normalized projective tuple.
inline std::vector<Fp> normalize_projective(std::vector<Fp> v) {
    for (const auto& c : v) {
        if (c.is_zero()) continue;
        Fp inv = c.inv();
        for (auto& x : v) x *= inv;
        return v;
    }
    throw degenerate_input("projective tuple is identically zero");
}

}  // namespace theta
