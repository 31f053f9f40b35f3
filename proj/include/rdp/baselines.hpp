#pragma once

// Classic tradeoffs used as comparison baselines: Hellman tables, Hellman
// tables with distinguished points, and rainbow tables. Same one-way
// functions and counter contract as the rainbow distinguished point engine.
//
// Reductions: Hellman (both variants) r_i(y) = (y + i) mod N per table;
// rainbow r_{i,s}(y) = (y + i*t + s) mod N per table and column.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdp/offline.hpp"
#include "rdp/online.hpp"
#include "rdp/storage.hpp"

namespace rdp {

enum class Method { RainbowDp, Hellman, HellmanDp, Rainbow };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::RainbowDp: return "rainbow-dp";
    case Method::Hellman: return "hellman";
    case Method::HellmanDp: return "hellman-dp";
    case Method::Rainbow: return "rainbow";
    }
    return "?";
}

inline Method parse_method(std::string_view name) {
    for (Method m : {Method::RainbowDp, Method::Hellman, Method::HellmanDp, Method::Rainbow})
        if (method_name(m) == name) return m;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

struct BaselineConfig {
    Method method = Method::Rainbow;
    /// Starting points per table.
    std::uint64_t m = 0;
    /// Fixed chain length (hellman, rainbow) or expected length 2^k_bits (hellman-dp).
    std::uint64_t t = 0;
    std::uint32_t l = 1;
    int n_bits = 20;
    /// hellman-dp only: DP width (t = 2^k_bits) and length bound round(c*t).
    int k_bits = 0;
    double c = 1.0;
    std::uint64_t seed = 0x5eed;
    std::string function_id = "prf-test";
    /// Upper bound on m*t*l.
    std::uint64_t budget_cap = std::uint64_t{1} << 36;

    std::uint64_t N() const { return std::uint64_t{1} << n_bits; }
    std::uint64_t mask() const { return N() - 1; }
    /// Maximum stored chain length.
    std::uint32_t max_len() const {
        return method == Method::HellmanDp ? chain_length_bound(c, t) : static_cast<std::uint32_t>(t);
    }

    void validate() const {
        if (method == Method::RainbowDp) throw ConfigError("rainbow-dp is not a baseline method");
        if (n_bits <= 0 || n_bits > 62) throw ConfigError("n_bits must be in [1, 62]");
        if (m < 1 || t < 1 || l < 1) throw ConfigError("baseline dimensions must be positive");
        if (m > N()) throw ConfigError("m exceeds N");
        if (t > 0xffffffffULL) throw ConfigError("chain length too large");
        if (method == Method::HellmanDp) {
            if (k_bits <= 0 || k_bits >= n_bits) throw ConfigError("hellman-dp needs 0 < k_bits < n_bits");
            if (t != (std::uint64_t{1} << k_bits)) throw ConfigError("hellman-dp needs t = 2^k_bits");
            if (!(c > 0.0) || max_len() < 1) throw ConfigError("hellman-dp needs a positive length bound");
        }
        (void)function_kind(function_id);
        const long double work = static_cast<long double>(m) * t * l;
        if (work > static_cast<long double>(budget_cap))
            throw ConfigError("m*t*l exceeds the budget cap of " + std::to_string(budget_cap));
    }

    friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

/// One baseline table. Records are in (len, ep, sp) order; `by_ep` indexes
/// them by (ep, sp) for length-agnostic lookup.
struct BaselineTable {
    BaselineConfig config;
    std::uint32_t table_index = 0;
    std::vector<ChainRecord> records;
    std::uint64_t precomp_invocations = 0;
    std::vector<std::uint32_t> by_ep;

    void rebuild_index() {
        std::sort(records.begin(), records.end(), record_less);
        by_ep.resize(records.size());
        for (std::size_t k = 0; k < records.size(); ++k) by_ep[k] = static_cast<std::uint32_t>(k);
        std::sort(by_ep.begin(), by_ep.end(), [this](std::uint32_t a, std::uint32_t b) {
            return std::tie(records[a].ep, records[a].sp) < std::tie(records[b].ep, records[b].sp);
        });
    }

    /// Records whose ending point is `ep`, ascending by sp.
    template <typename Visit>
    void for_each_match(Point ep, Visit&& visit) const {
        auto it = std::lower_bound(by_ep.begin(), by_ep.end(), ep,
                                   [this](std::uint32_t k, Point v) { return records[k].ep < v; });
        for (; it != by_ep.end() && records[*it].ep == ep; ++it) visit(records[*it]);
    }

    friend bool operator==(const BaselineTable&, const BaselineTable&) = default;
};

namespace detail {

class BaselineStepper {
public:
    BaselineStepper(const BaselineConfig& cfg, std::uint32_t table_index)
        : f_(cfg.function_id, cfg.n_bits), method_(cfg.method), mask_(cfg.mask()), table_index_(table_index),
          t_(cfg.t), dp_shift_(cfg.n_bits - cfg.k_bits) {}

    const OneWayFunction& function() const { return f_; }

    /// Reduction applied after f in column s (s ignored by the Hellman variants).
    Point reduce(std::uint32_t s, Point y) const {
        if (method_ == Method::Rainbow) return Point{(y.value + table_index_ * t_ + s) & mask_};
        return Point{(y.value + table_index_) & mask_};
    }

    Point step(std::uint32_t s, Point x, CounterSet& counters) const { return reduce(s, f_(x, counters)); }

    bool is_dp(Point x) const { return (x.value >> dp_shift_) == 0; }

private:
    OneWayFunction f_;
    Method method_;
    std::uint64_t mask_;
    std::uint64_t table_index_;
    std::uint64_t t_;
    int dp_shift_;
};

} // namespace detail

inline BaselineTable build_baseline_table(const BaselineConfig& cfg, std::uint32_t table_index) {
    cfg.validate();
    if (table_index >= cfg.l) throw ContractViolation("table_index must be < l");
    const detail::BaselineStepper stepper(cfg, table_index);
    const auto starts = generate_start_points(cfg.m, table_index, cfg.seed, cfg.n_bits);
    const std::uint32_t max_len = cfg.max_len();

    BaselineTable table;
    table.config = cfg;
    table.table_index = table_index;
    table.records.reserve(starts.size());
    CounterSet counters;
    for (Point sp : starts) {
        Point x = sp;
        if (cfg.method == Method::HellmanDp) {
            for (std::uint32_t s = 1; s <= max_len; ++s) {
                x = stepper.step(s, x, counters);
                if (stepper.is_dp(x)) {
                    table.records.push_back({sp, s, x});
                    break;
                }
            }
        } else {
            for (std::uint32_t s = 1; s <= max_len; ++s) x = stepper.step(s, x, counters);
            table.records.push_back({sp, max_len, x});
        }
    }
    if (table.records.empty()) throw BuildError("baseline table " + std::to_string(table_index) + " is empty");
    table.precomp_invocations = counters.f_invocations;
    table.rebuild_index();
    return table;
}

/// All l tables of a baseline configuration.
inline std::vector<BaselineTable> build_baseline(const BaselineConfig& cfg) {
    cfg.validate();
    std::vector<BaselineTable> tables;
    for (std::uint32_t i = 0; i < cfg.l; ++i) tables.push_back(build_baseline_table(cfg, i));
    return tables;
}

/// Element X_j (1-based) of a baseline chain.
inline Point baseline_chain_element(const detail::BaselineStepper& stepper, Point sp, std::uint32_t j,
                                    CounterSet& counters) {
    Point x = sp;
    for (std::uint32_t u = 1; u < j; ++u) x = stepper.step(u, x, counters);
    return x;
}

/// Method-appropriate online search. iterations_executed counts hypothesized
/// positions examined across all tables.
inline SearchOutcome search_baseline(std::span<const BaselineTable> tables, Point y_star) {
    if (tables.empty()) throw ContractViolation("search needs at least one table");
    const BaselineConfig& cfg = tables.front().config;
    std::vector<const BaselineTable*> ordered;
    for (const auto& t : tables) {
        if (!(t.config == cfg)) throw ContractViolation("baseline tables have mismatched configurations");
        ordered.push_back(&t);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const BaselineTable* a, const BaselineTable* b) { return a->table_index < b->table_index; });
    std::vector<detail::BaselineStepper> steppers;
    for (const auto* t : ordered) steppers.emplace_back(cfg, t->table_index);

    SearchOutcome out;
    CounterSet& counters = out.counters;
    // Regenerates X_j of `rec` and compares f(X_j) with y*.
    auto try_alarm = [&](std::size_t k, const ChainRecord& rec, std::uint32_t j, std::uint32_t iteration) {
        ++counters.alarms;
        const Point x = baseline_chain_element(steppers[k], rec.sp, j, counters);
        const bool hit = steppers[k].function()(x, counters) == y_star;
        out.alarms.push_back({ordered[k]->table_index, iteration, j, hit});
        if (hit) {
            out.found = x;
            out.found_at = FoundAt{ordered[k]->table_index, iteration, rec.sp};
            return true;
        }
        ++counters.false_alarms;
        return false;
    };

    const auto t = static_cast<std::uint32_t>(cfg.t);
    switch (cfg.method) {
    case Method::Rainbow:
        for (std::uint32_t s = 1; s <= t; ++s) {
            ++counters.iterations_executed;
            const std::uint32_t p = t - s + 1;
            for (std::size_t k = 0; k < ordered.size(); ++k) {
                Point q = steppers[k].reduce(p, y_star);
                for (std::uint32_t col = p + 1; col <= t; ++col) q = steppers[k].step(col, q, counters);
                bool done = false;
                ordered[k]->for_each_match(q, [&](const ChainRecord& rec) {
                    if (!done) done = try_alarm(k, rec, p, s);
                });
                if (done) return out;
            }
        }
        break;
    case Method::Hellman:
        for (std::size_t k = 0; k < ordered.size(); ++k) {
            Point q = steppers[k].reduce(0, y_star);
            for (std::uint32_t d = 0; d < t; ++d) {
                ++counters.iterations_executed;
                if (d > 0) q = steppers[k].step(0, q, counters);
                bool done = false;
                ordered[k]->for_each_match(q, [&](const ChainRecord& rec) {
                    if (!done) done = try_alarm(k, rec, t - d, d + 1);
                });
                if (done) return out;
            }
        }
        break;
    case Method::HellmanDp: {
        const std::uint32_t bound = cfg.max_len();
        for (std::size_t k = 0; k < ordered.size(); ++k) {
            Point q = steppers[k].reduce(0, y_star);
            for (std::uint32_t d = 0; d < bound; ++d) {
                ++counters.iterations_executed;
                if (d > 0) q = steppers[k].step(0, q, counters);
                if (!steppers[k].is_dp(q)) continue;
                bool done = false;
                ordered[k]->for_each_match(q, [&](const ChainRecord& rec) {
                    if (!done && rec.len > d) done = try_alarm(k, rec, rec.len - d, d + 1);
                });
                if (done) return out;
                break;
            }
        }
        break;
    }
    case Method::RainbowDp: throw ContractViolation("use OnlineSearcher for rainbow-dp tables");
    }
    return out;
}

inline BatchResult batch_search_baseline(std::span<const Point> targets, std::span<const BaselineTable> tables,
                                         unsigned workers = 1) {
    BatchResult res;
    res.outcomes.resize(targets.size());
    parallel_blocks(targets.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t k = begin; k < end; ++k) res.outcomes[k] = search_baseline(tables, targets[k]);
    });
    res.stats = aggregate(res.outcomes);
    return res;
}

struct ReferenceCoefficient {
    Method method;
    double success_p;
    double D_pc;
    double D_tcr;
};

/// Published optimal coefficients (TM^2 = D_tcr N^2) at matched success.
inline std::vector<ReferenceCoefficient> reference_coefficients() {
    return {
        {Method::Hellman, 0.80, 2.1733, 3.11},   {Method::Rainbow, 0.80, 1.9814, 2.20},
        {Method::HellmanDp, 0.80, 2.9532, 11.58}, {Method::RainbowDp, 0.80, 3.0, 24.93},
        {Method::Hellman, 0.90, 3.1093, 7.17},   {Method::Rainbow, 0.90, 2.8068, 4.68},
        {Method::HellmanDp, 0.90, 4.2250, 26.59}, {Method::RainbowDp, 0.90, 4.0, 66.95},
    };
}

namespace storage {

/// Version-2 image: function_id carries "<method>/<function>"; k_bits is 0
/// and c is 1 for the fixed-length methods.
inline std::vector<std::uint8_t> serialize(const BaselineTable& table) {
    const auto& cfg = table.config;
    FileHeader h;
    h.version = kVersionBaseline;
    h.n_bits = std::uint8_t(cfg.n_bits);
    h.k_bits = std::uint8_t(cfg.method == Method::HellmanDp ? cfg.k_bits : 0);
    h.c = cfg.method == Method::HellmanDp ? cfg.c : 1.0;
    h.t_hat = cfg.max_len();
    h.l = std::uint16_t(cfg.l);
    h.table_index = std::uint16_t(table.table_index);
    h.m0_tilde = cfg.m;
    h.seed = cfg.seed;
    h.function_id = std::string(method_name(cfg.method)) + "/" + cfg.function_id;
    h.precomp_invocations = table.precomp_invocations;
    return encode(h, table.records);
}

inline BaselineTable deserialize_baseline(const std::vector<std::uint8_t>& bytes) {
    auto [h, records] = decode(bytes);
    if (h.version != kVersionBaseline) throw LoadError("version", "expected a baseline table (version 2)");
    const auto slash = h.function_id.find('/');
    if (slash == std::string::npos) throw LoadError("function_id", "missing method tag");

    BaselineConfig cfg;
    try {
        cfg.method = parse_method(h.function_id.substr(0, slash));
        cfg.function_id = h.function_id.substr(slash + 1);
        cfg.n_bits = h.n_bits;
        cfg.k_bits = h.k_bits;
        cfg.c = h.c;
        cfg.m = h.m0_tilde;
        cfg.l = h.l;
        cfg.seed = h.seed;
        cfg.t = cfg.method == Method::HellmanDp ? (std::uint64_t{1} << std::min<int>(h.k_bits, 62)) : h.t_hat;
        cfg.budget_cap = ~std::uint64_t{0};
        cfg.validate();
    } catch (const ConfigError& e) {
        throw LoadError("params", std::string("validation failed: ") + e.what());
    }
    if (cfg.max_len() != h.t_hat) throw LoadError("t_hat", "chain length does not match the method parameters");
    if (h.table_index >= cfg.l) throw LoadError("table_index", "table_index must be < l");

    BaselineTable table;
    table.config = cfg;
    table.table_index = h.table_index;
    table.records = std::move(records);
    table.precomp_invocations = h.precomp_invocations;
    for (std::size_t k = 0; k < table.records.size(); ++k) {
        if (k > 0 && record_less(table.records[k], table.records[k - 1]))
            throw LoadError("records", "records not sorted by (len, ep, sp)");
        if (table.records[k].len < 1 || table.records[k].len > h.t_hat) throw LoadError("records", "record length out of range");
    }
    table.rebuild_index();
    return table;
}

inline void save(const BaselineTable& table, const std::filesystem::path& path) { write_file(path, serialize(table)); }

inline BaselineTable load_baseline(const std::filesystem::path& path) { return deserialize_baseline(read_file(path)); }

} // namespace storage

} // namespace rdp
