#pragma once

// Precomputation: chains from distinct starting points until the first
// distinguished point, discarding chains longer than t_hat.

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "rdp/chain_function.hpp"
#include "rdp/parallel.hpp"
#include "rdp/table.hpp"

namespace rdp {

enum class StartPointScheme {
    /// sp_j = mix(seed, table_index, j) mod N, collisions resolved by probing +1.
    SeededMix,
    /// sp_j = j.
    Sequential,
};

struct BuildOptions {
    StartPointScheme scheme = StartPointScheme::SeededMix;
    unsigned workers = 1;
    /// Regenerate every record after the build when N <= 2^16, else every 100th.
    bool verify = true;
};

namespace detail {

class PointSet {
public:
    explicit PointSet(std::uint64_t n) : dense_(n <= (std::uint64_t{1} << 32)) {
        if (dense_) bits_.assign(n, false);
    }

    /// Inserts x; false if already present.
    bool insert(std::uint64_t x) {
        if (dense_) {
            if (bits_[x]) return false;
            bits_[x] = true;
            return true;
        }
        return sparse_.insert(x).second;
    }

private:
    bool dense_;
    std::vector<bool> bits_;
    std::unordered_set<std::uint64_t> sparse_;
};

} // namespace detail

inline std::uint64_t start_point_mix(std::uint64_t seed, std::uint32_t table_index, std::uint64_t j) {
    const std::uint64_t stream = mix64(seed ^ mix64(0x9e3779b97f4a7c15ULL * (std::uint64_t(table_index) + 1)));
    return mix64(stream + j);
}

/// m0_tilde pairwise-distinct starting points, deterministic in (seed, table_index).
inline std::vector<Point> generate_start_points(std::uint64_t m0_tilde, std::uint32_t table_index, std::uint64_t seed,
                                                int n_bits, StartPointScheme scheme = StartPointScheme::SeededMix) {
    const std::uint64_t n = std::uint64_t{1} << n_bits;
    if (m0_tilde > n) throw ConfigError("m0_tilde exceeds the search space size N");
    std::vector<Point> out;
    out.reserve(m0_tilde);
    if (scheme == StartPointScheme::Sequential) {
        for (std::uint64_t j = 0; j < m0_tilde; ++j) out.push_back(Point{j});
        return out;
    }
    detail::PointSet used(n);
    for (std::uint64_t j = 0; j < m0_tilde; ++j) {
        std::uint64_t x = start_point_mix(seed, table_index, j) & (n - 1);
        while (!used.insert(x)) x = (x + 1) & (n - 1);
        out.push_back(Point{x});
    }
    return out;
}

/// X_1 = sp, X_{s+1} = f_{i,s}(X_s); ends at the first s with X_{s+1}
/// distinguished. Absent when no DP appears within t_hat applications.
inline std::optional<ChainRecord> build_chain(const ChainStepper& stepper, Point sp, std::uint32_t t_hat,
                                              CounterSet& counters) {
    Point x = sp;
    for (std::uint32_t s = 1; s <= t_hat; ++s) {
        x = stepper.step(s, x, counters);
        if (stepper.is_dp(x)) return ChainRecord{sp, s, x};
    }
    return std::nullopt;
}

inline std::optional<ChainRecord> build_chain(std::uint32_t i, Point sp, const SpaceParams& params,
                                              CounterSet& counters) {
    return build_chain(ChainStepper(params, i), sp, params.t_hat, counters);
}

/// Regenerates `r` in table i: the chain must reach r.ep after exactly r.len
/// steps with no distinguished point among X_2..X_len.
inline bool verify_record(const ChainRecord& r, std::uint32_t table_index, const SpaceParams& params,
                          CounterSet& counters) {
    if (r.len < 1 || r.len > params.t_hat) return false;
    const ChainStepper stepper(params, table_index);
    Point x = r.sp;
    for (std::uint32_t s = 1; s <= r.len; ++s) {
        x = stepper.step(s, x, counters);
        if (s < r.len && stepper.is_dp(x)) return false;
    }
    return x == r.ep && stepper.is_dp(x);
}

/// Builds table i. precomp_invocations counts every f evaluation, including
/// the t_hat evaluations of each discarded chain.
inline PrecompTable build_table(std::uint32_t table_index, const SpaceParams& params, const BuildOptions& options = {}) {
    params.validate();
    if (table_index >= params.l) throw ContractViolation("table_index must be < l");
    const auto starts = generate_start_points(params.m0_tilde, table_index, params.seed, params.n_bits, options.scheme);

    const ChainStepper stepper(params, table_index);
    std::vector<std::optional<ChainRecord>> built(starts.size());
    std::vector<CounterSet> worker_counters(resolve_workers(options.workers));
    parallel_blocks(starts.size(), options.workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        CounterSet local;
        for (std::size_t j = begin; j < end; ++j) built[j] = build_chain(stepper, starts[j], params.t_hat, local);
        worker_counters[w] += local;
    });

    CounterSet total;
    for (const auto& c : worker_counters) total += c;
    std::vector<ChainRecord> records;
    records.reserve(starts.size());
    for (auto& r : built)
        if (r) records.push_back(*r);
    if (records.empty()) throw BuildError("table " + std::to_string(table_index) + ": no chain reached a distinguished point");

    auto table = PrecompTable::assemble(params, table_index, std::move(records), total.f_invocations);

    if (options.verify) {
        const std::size_t stride = params.N() <= (std::uint64_t{1} << 16) ? 1 : 100;
        CounterSet scratch;
        for (std::size_t k = 0; k < table.records.size(); k += stride)
            if (!verify_record(table.records[k], table_index, params, scratch))
                throw BuildError("table " + std::to_string(table_index) + ": record " + std::to_string(k) +
                                 " failed regeneration");
    }
    return table;
}

/// Builds all l tables.
inline std::vector<PrecompTable> build_tables(const SpaceParams& params, const BuildOptions& options = {}) {
    std::vector<PrecompTable> tables;
    tables.reserve(params.l);
    for (std::uint32_t i = 0; i < params.l; ++i) tables.push_back(build_table(i, params, options));
    return tables;
}

} // namespace rdp
