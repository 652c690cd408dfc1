#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace theta {

// Caller misuse: mismatched moduli, bad levels, malformed descriptors.
struct usage_error : std::invalid_argument {
    explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

struct division_by_zero : std::domain_error {
    explicit division_by_zero(const std::string& what) : std::domain_error(what) {}
};

// An element vanishes identically on one CRT component; no factor can be
// extracted, the component itself is degenerate for the requested operation.
struct zero_divisor_error : std::domain_error {
    std::size_t component;
    explicit zero_divisor_error(std::size_t comp, const std::string& what)
        : std::domain_error(what), component(comp) {}
};

struct degenerate_input : std::domain_error {
    explicit degenerate_input(const std::string& what) : std::domain_error(what) {}
};

struct unsupported_level : std::domain_error {
    explicit unsupported_level(const std::string& what) : std::domain_error(what) {}
};

struct invalid_kernel : std::domain_error {
    explicit invalid_kernel(const std::string& what) : std::domain_error(what) {}
};

// Internal invariant broken (e.g. a formal exponent not divisible by ell).
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace theta
