#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "errors.hpp"

namespace theta {

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * b) % p);
}

inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    std::uint64_t s = a + b;  // p < 2^62, no overflow
    return s >= p ? s - p : s;
}

inline std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1 % p;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin, valid for all n < 2^64.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == q) return true;
        if (n % q == 0) return false;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

}  // namespace detail

// Element of F_p in canonical form, carrying its modulus. The modulus is a
// runtime value so one binary serves every test field.
class Fp {
  public:
    Fp() : v_(0), p_(0) {}
    Fp(std::uint64_t v, std::uint64_t p) : v_(v % p), p_(p) {}

    std::uint64_t value() const { return v_; }
    std::uint64_t modulus() const { return p_; }
    bool is_zero() const { return v_ == 0; }

    friend Fp operator+(const Fp& a, const Fp& b) {
        a.match(b);
        return Fp::raw(detail::addmod(a.v_, b.v_, a.p_), a.p_);
    }
    friend Fp operator-(const Fp& a, const Fp& b) {
        a.match(b);
        return Fp::raw(detail::submod(a.v_, b.v_, a.p_), a.p_);
    }
    friend Fp operator*(const Fp& a, const Fp& b) {
        a.match(b);
        return Fp::raw(detail::mulmod(a.v_, b.v_, a.p_), a.p_);
    }
    Fp operator-() const { return Fp::raw(v_ == 0 ? 0 : p_ - v_, p_); }
    Fp& operator+=(const Fp& o) { return *this = *this + o; }
    Fp& operator-=(const Fp& o) { return *this = *this - o; }
    Fp& operator*=(const Fp& o) { return *this = *this * o; }

    friend bool operator==(const Fp& a, const Fp& b) { return a.p_ == b.p_ && a.v_ == b.v_; }
    friend bool operator!=(const Fp& a, const Fp& b) { return !(a == b); }

    Fp pow(std::uint64_t e) const { return Fp::raw(detail::powmod(v_, e, p_), p_); }

    Fp inv() const {
        if (v_ == 0) throw division_by_zero("inverse of zero in F_p");
        // extended Euclid on (v, p)
        std::int64_t t = 0, newt = 1;
        std::uint64_t r = p_, newr = v_;
        while (newr != 0) {
            std::uint64_t q = r / newr;
            std::int64_t tt = t - static_cast<std::int64_t>(q) * newt;
            t = newt; newt = tt;
            std::uint64_t rr = r - q * newr;
            r = newr; newr = rr;
        }
        std::uint64_t u = t >= 0 ? static_cast<std::uint64_t>(t)
                                 : p_ - static_cast<std::uint64_t>(-t);
        return Fp::raw(u % p_, p_);
    }

    friend Fp operator/(const Fp& a, const Fp& b) { return a * b.inv(); }

    // Legendre symbol: 1, p-1 (= -1), or 0.
    std::uint64_t legendre() const { return detail::powmod(v_, (p_ - 1) / 2, p_); }

    // Tonelli-Shanks. Empty when *this is a non-residue.
    std::optional<Fp> sqrt() const {
        if (v_ == 0) return Fp::raw(0, p_);
        if (legendre() != 1) return std::nullopt;
        if (p_ % 4 == 3) return pow((p_ + 1) / 4);
        std::uint64_t q = p_ - 1;
        int s = 0;
        while ((q & 1) == 0) { q >>= 1; ++s; }
        std::uint64_t z = 2;
        while (detail::powmod(z, (p_ - 1) / 2, p_) != p_ - 1) ++z;
        std::uint64_t m = s;
        std::uint64_t c = detail::powmod(z, q, p_);
        std::uint64_t t = detail::powmod(v_, q, p_);
        std::uint64_t r = detail::powmod(v_, (q + 1) / 2, p_);
        while (t != 1) {
            std::uint64_t i = 0, tt = t;
            while (tt != 1) { tt = detail::mulmod(tt, tt, p_); ++i; }
            std::uint64_t b = c;
            for (std::uint64_t j = 0; j + i + 1 < m; ++j) b = detail::mulmod(b, b, p_);
            m = i;
            c = detail::mulmod(b, b, p_);
            t = detail::mulmod(t, c, p_);
            r = detail::mulmod(r, b, p_);
        }
        return Fp::raw(r, p_);
    }

  private:
    static Fp raw(std::uint64_t v, std::uint64_t p) {
        Fp x;
        x.v_ = v;
        x.p_ = p;
        return x;
    }
    void match(const Fp& o) const {
        if (p_ != o.p_) throw usage_error("F_p modulus mismatch");
    }
    std::uint64_t v_, p_;
};

inline Fp zero_like(const Fp& x) { return Fp(0, x.modulus()); }
inline Fp one_like(const Fp& x) { return Fp(1, x.modulus()); }

// The prime field itself: validates p once, then mints elements.
class PrimeField {
  public:
    explicit PrimeField(std::uint64_t p) : p_(p) {
        if (p < 3 || p % 2 == 0) throw usage_error("modulus must be an odd prime >= 3");
        if (p >= (1ull << 62)) throw usage_error("modulus must be below 2^62");
        if (!detail::is_prime_u64(p)) throw usage_error("modulus " + std::to_string(p) + " is not prime");
    }

    std::uint64_t modulus() const { return p_; }

    Fp operator()(std::uint64_t v) const { return Fp(v, p_); }
    Fp from_int(std::int64_t v) const {
        std::int64_t m = v % static_cast<std::int64_t>(p_);
        if (m < 0) m += static_cast<std::int64_t>(p_);
        return Fp(static_cast<std::uint64_t>(m), p_);
    }
    Fp zero() const { return Fp(0, p_); }
    Fp one() const { return Fp(1, p_); }

  private:
    std::uint64_t p_;
};

}  // namespace theta
