#pragma once

// The one-way function f, the reduction family r_{i,s}, the distinguished
// point predicate and the single chain step f_{i,s} = r_{i,s} o f.

#include <cstdint>
#include <string>
#include <string_view>

#include "rdp/error.hpp"
#include "rdp/md5.hpp"
#include "rdp/params.hpp"

namespace rdp {

enum class FunctionKind { Md5Trunc, PrfTest };

/// splitmix64 finalizer: a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kPrfTestKey = 0x243f6a8885a308d3ULL;

inline FunctionKind function_kind(std::string_view id) {
    if (id == "md5-trunc") return FunctionKind::Md5Trunc;
    if (id == "prf-test") return FunctionKind::PrfTest;
    throw ConfigError("unknown function_id '" + std::string(id) + "' (expected md5-trunc or prf-test)");
}

/// The target function over [0, N).
///
/// md5-trunc: MD5 of x as 8 little-endian bytes; the first 8 digest bytes are
/// read little-endian and reduced mod N.
/// prf-test:  mix64(mix64(x ^ kPrfTestKey)) mod N, a keyed 64-bit permutation
/// truncated to n_bits. Cheap, stable, used by tests and desk-scale runs.
class OneWayFunction {
public:
    OneWayFunction(std::string_view function_id, int n_bits)
        : kind_(function_kind(function_id)), mask_((std::uint64_t{1} << n_bits) - 1) {}

    explicit OneWayFunction(const SpaceParams& p) : OneWayFunction(p.function_id, p.n_bits) {}

    FunctionKind kind() const { return kind_; }

    /// Evaluates f(x); counts one invocation.
    Point operator()(Point x, CounterSet& counters) const {
        ++counters.f_invocations;
        return Point{raw(x.value)};
    }

    std::uint64_t raw(std::uint64_t x) const {
        switch (kind_) {
        case FunctionKind::Md5Trunc: return md5::md5_u64le(x) & mask_;
        case FunctionKind::PrfTest: return mix64(mix64(x ^ kPrfTestKey)) & mask_;
        }
        return 0;
    }

private:
    FunctionKind kind_;
    std::uint64_t mask_;
};

inline Point evaluate(const OneWayFunction& f, Point x, CounterSet& counters) { return f(x, counters); }

/// r_{i,s}(y) = (y + i*t_hat + s) mod N, for 1 <= s <= t_hat. Not an f-invocation.
inline Point reduce(std::uint32_t i, std::uint32_t s, Point y, const SpaceParams& p) {
    if (s < 1 || s > p.t_hat)
        throw ContractViolation("reduce: column " + std::to_string(s) + " outside [1, " + std::to_string(p.t_hat) + "]");
    const std::uint64_t offset = std::uint64_t(i) * p.t_hat + s;
    return Point{(y.value + offset) & p.mask()};
}

/// True iff the top k_bits of the n_bits-wide x are zero, i.e. x < N/t.
inline bool is_dp(Point x, const SpaceParams& p) { return (x.value >> (p.n_bits - p.k_bits)) == 0; }

/// Iteration context for one table: hot loop of both phases. Column bounds are
/// the caller's responsibility here; `reduce` is the checked entry point.
class ChainStepper {
public:
    ChainStepper(const SpaceParams& p, std::uint32_t table_index)
        : f_(p), mask_(p.mask()), table_offset_(std::uint64_t(table_index) * p.t_hat),
          dp_shift_(p.n_bits - p.k_bits) {}

    const OneWayFunction& function() const { return f_; }

    Point reduce(std::uint32_t s, Point y) const { return Point{(y.value + table_offset_ + s) & mask_}; }

    /// f_{i,s}(x); one invocation.
    Point step(std::uint32_t s, Point x, CounterSet& counters) const { return reduce(s, f_(x, counters)); }

    bool is_dp(Point x) const { return (x.value >> dp_shift_) == 0; }

private:
    OneWayFunction f_;
    std::uint64_t mask_;
    std::uint64_t table_offset_;
    int dp_shift_;
};

/// f_{i,s}(x) = reduce(i, s, evaluate(x)).
inline Point step(std::uint32_t i, std::uint32_t s, Point x, const SpaceParams& p, CounterSet& counters) {
    return reduce(i, s, evaluate(OneWayFunction(p), x, counters), p);
}

} // namespace rdp
