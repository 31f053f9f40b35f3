#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

#include "rdp/error.hpp"

namespace rdp {

/// An element of the search space [0, N).
struct Point {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

/// Exact cost accounting for a chain build or an online search.
struct CounterSet {
    std::uint64_t f_invocations = 0;
    std::uint64_t alarms = 0;
    std::uint64_t false_alarms = 0;
    std::uint64_t iterations_executed = 0;

    CounterSet& operator+=(const CounterSet& o) {
        f_invocations += o.f_invocations;
        alarms += o.alarms;
        false_alarms += o.false_alarms;
        iterations_executed += o.iterations_executed;
        return *this;
    }

    friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

/// round(c*t) with ties rounded up.
inline std::uint32_t chain_length_bound(double c, std::uint64_t t) {
    return static_cast<std::uint32_t>(std::floor(c * static_cast<double>(t) + 0.5));
}

/// Structural parameters of one tradeoff configuration.
///
/// N = 2^n_bits is the search space, t = 2^k_bits the expected chain length
/// (a point is distinguished when its top k_bits bits are zero), and
/// t_hat = round(c*t) the maximum chain length kept during precomputation.
struct SpaceParams {
    int n_bits = 24;
    int k_bits = 9;
    double c = 1.8;
    std::uint32_t t_hat = 922;
    std::uint32_t l = 1;
    std::uint64_t m0_tilde = 262144;
    std::uint64_t seed = 0x5eed;
    std::string function_id = "md5-trunc";

    std::uint64_t N() const { return std::uint64_t{1} << n_bits; }
    std::uint64_t t() const { return std::uint64_t{1} << k_bits; }
    std::uint64_t mask() const { return N() - 1; }

    /// Builds a parameter set with t_hat derived from c.
    static SpaceParams make(int n_bits, int k_bits, double c, std::uint32_t l, std::uint64_t m0_tilde,
                            std::uint64_t seed, std::string function_id) {
        SpaceParams p;
        p.n_bits = n_bits;
        p.k_bits = k_bits;
        p.c = c;
        p.l = l;
        p.m0_tilde = m0_tilde;
        p.seed = seed;
        p.function_id = std::move(function_id);
        if (n_bits > 0 && n_bits <= 62 && k_bits > 0 && k_bits < n_bits && c > 0.0)
            p.t_hat = chain_length_bound(c, std::uint64_t{1} << k_bits);
        p.validate();
        return p;
    }

    /// Throws ConfigError when an invariant does not hold.
    void validate() const {
        if (n_bits <= 0 || n_bits > 62) throw ConfigError("n_bits must be in [1, 62], got " + std::to_string(n_bits));
        if (k_bits <= 0 || k_bits >= n_bits)
            throw ConfigError("k_bits must satisfy 0 < k_bits < n_bits, got k_bits=" + std::to_string(k_bits) +
                              " n_bits=" + std::to_string(n_bits));
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c must be a positive finite number");
        if (t_hat < 1 || t_hat != chain_length_bound(c, t()))
            throw ConfigError("t_hat=" + std::to_string(t_hat) + " does not equal round(c*t)=" +
                              std::to_string(chain_length_bound(c, t())));
        if (l < 1) throw ConfigError("l must be at least 1");
        if (m0_tilde < 1 || m0_tilde > N()) throw ConfigError("m0_tilde must be in [1, N]");
    }

    friend bool operator==(const SpaceParams&, const SpaceParams&) = default;
};

} // namespace rdp
