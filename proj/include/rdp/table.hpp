#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "rdp/chain_function.hpp"
#include "rdp/params.hpp"

namespace rdp {

/// One precomputed chain: `len` applications of f_{i,s} take `sp` to `ep`.
struct ChainRecord {
    Point sp;
    std::uint32_t len = 0;
    Point ep;

    friend bool operator==(const ChainRecord&, const ChainRecord&) = default;
};

/// Table order: (len, ep, sp) ascending.
inline bool record_less(const ChainRecord& a, const ChainRecord& b) {
    return std::tie(a.len, a.ep, a.sp) < std::tie(b.len, b.ep, b.sp);
}

/// A sorted, length-indexed table for one table index i.
///
/// Records with length L occupy [length_index[L], length_index[L+1]); the
/// index has t_hat + 2 entries and entry 0 is always 0.
struct PrecompTable {
    SpaceParams params;
    std::uint32_t table_index = 0;
    std::vector<ChainRecord> records;
    std::uint64_t precomp_invocations = 0;
    std::vector<std::size_t> length_index;

    /// Sorts `records` into table order and builds the length index.
    static PrecompTable assemble(SpaceParams params, std::uint32_t table_index, std::vector<ChainRecord> records,
                                 std::uint64_t precomp_invocations) {
        PrecompTable table;
        table.params = std::move(params);
        table.table_index = table_index;
        table.records = std::move(records);
        table.precomp_invocations = precomp_invocations;
        std::sort(table.records.begin(), table.records.end(), record_less);
        table.rebuild_index();
        return table;
    }

    void rebuild_index() {
        const std::uint32_t t_hat = params.t_hat;
        length_index.assign(std::size_t(t_hat) + 2, 0);
        for (const auto& r : records) {
            if (r.len < 1 || r.len > t_hat)
                throw ContractViolation("record length " + std::to_string(r.len) + " outside [1, t_hat]");
            ++length_index[r.len + 1];
        }
        for (std::size_t k = 1; k < length_index.size(); ++k) length_index[k] += length_index[k - 1];
    }

    std::uint64_t m0() const { return records.size(); }

    /// Records of exactly this (len, ep), ascending by sp. Empty when len is out of range.
    std::span<const ChainRecord> matches(std::uint32_t len, Point ep) const {
        if (len < 1 || len > params.t_hat) return {};
        const auto first = records.begin() + static_cast<std::ptrdiff_t>(length_index[len]);
        const auto last = records.begin() + static_cast<std::ptrdiff_t>(length_index[len + 1]);
        const auto range = std::equal_range(first, last, ChainRecord{Point{}, len, ep},
                                            [](const ChainRecord& a, const ChainRecord& b) { return a.ep < b.ep; });
        return {range.first, range.second};
    }

    /// Starting points of all chains with this (len, ep).
    std::vector<Point> lookup(std::uint32_t len, Point ep) const {
        std::vector<Point> out;
        for (const auto& r : matches(len, ep)) out.push_back(r.sp);
        return out;
    }

    friend bool operator==(const PrecompTable&, const PrecompTable&) = default;
};

} // namespace rdp
