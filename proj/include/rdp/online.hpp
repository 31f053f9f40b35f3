#pragma once

// Online pre-image search over l rainbow distinguished point tables.
//
// Iteration s = 1..t_hat hypothesizes that y* = f(X_p) with p = t_hat - s + 1.
// For every table (ascending table_index) the online chain starts at
// q = r_{i,p}(y*) and is walked through columns p+1..t_hat; each
// distinguished q met at column `col` is looked up among chains of length
// `col`. Every match is an alarm and costs p invocations: p-1 steps to
// regenerate X_p from the start point plus one evaluation to compare with y*.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rdp/chain_function.hpp"
#include "rdp/parallel.hpp"
#include "rdp/table.hpp"

namespace rdp {

struct SearchOptions {
    /// Stop walking a table's online chain at its first distinguished point.
    /// Changes cost only; off by default to match the analytic cost model.
    bool break_at_first_dp = false;
    /// Keep the per-alarm event list in each outcome.
    bool record_alarms = true;
};

struct AlarmEvent {
    std::uint32_t table_index = 0;
    std::uint32_t iteration = 0;
    /// Hypothesized column p of the pre-image; the alarm cost p invocations.
    std::uint32_t position = 0;
    bool true_alarm = false;
};

struct FoundAt {
    std::uint32_t table_index = 0;
    std::uint32_t iteration = 0;
    Point sp;
};

struct SearchOutcome {
    std::optional<Point> found;
    CounterSet counters;
    std::optional<FoundAt> found_at;
    std::vector<AlarmEvent> alarms;
};

/// Search engine over a fixed, immutable set of tables.
class OnlineSearcher {
public:
    explicit OnlineSearcher(std::span<const PrecompTable> tables, SearchOptions options = {}) : options_(options) {
        if (tables.empty()) throw ContractViolation("search needs at least one table");
        params_ = tables.front().params;
        for (const auto& t : tables) {
            if (!(t.params == params_)) throw ContractViolation("tables have mismatched parameters");
            if (t.table_index >= params_.l) throw ContractViolation("table_index must be < l");
            ordered_.push_back(&t);
        }
        std::sort(ordered_.begin(), ordered_.end(),
                  [](const PrecompTable* a, const PrecompTable* b) { return a->table_index < b->table_index; });
        for (std::size_t k = 1; k < ordered_.size(); ++k)
            if (ordered_[k]->table_index == ordered_[k - 1]->table_index)
                throw ContractViolation("duplicate table_index " + std::to_string(ordered_[k]->table_index));
        for (const auto* t : ordered_) steppers_.emplace_back(params_, t->table_index);
    }

    const SpaceParams& params() const { return params_; }
    std::size_t table_count() const { return ordered_.size(); }
    const SearchOptions& options() const { return options_; }

    /// Position of a table_index in processing order.
    std::size_t rank_of(std::uint32_t table_index) const {
        for (std::size_t k = 0; k < ordered_.size(); ++k)
            if (ordered_[k]->table_index == table_index) return k;
        throw ContractViolation("unknown table_index");
    }

    SearchOutcome search(Point y_star) const {
        SearchOutcome out;
        CounterSet& counters = out.counters;
        const std::uint32_t t_hat = params_.t_hat;
        struct Hit {
            std::uint32_t len;
            Point ep;
        };
        std::vector<Hit> hits;

        for (std::uint32_t s = 1; s <= t_hat; ++s) {
            ++counters.iterations_executed;
            const std::uint32_t p = t_hat - s + 1;
            for (std::size_t k = 0; k < ordered_.size(); ++k) {
                const PrecompTable& table = *ordered_[k];
                const ChainStepper& stepper = steppers_[k];

                hits.clear();
                Point q = stepper.reduce(p, y_star);
                if (stepper.is_dp(q)) hits.push_back({p, q});
                if (!(options_.break_at_first_dp && !hits.empty())) {
                    for (std::uint32_t col = p + 1; col <= t_hat; ++col) {
                        q = stepper.step(col, q, counters);
                        if (stepper.is_dp(q)) {
                            hits.push_back({col, q});
                            if (options_.break_at_first_dp) break;
                        }
                    }
                }

                for (const Hit& hit : hits) {
                    for (const ChainRecord& rec : table.matches(hit.len, hit.ep)) {
                        ++counters.alarms;
                        Point x = rec.sp;
                        for (std::uint32_t u = 1; u < p; ++u) x = stepper.step(u, x, counters);
                        const bool hit_target = stepper.function()(x, counters) == y_star;
                        if (options_.record_alarms) out.alarms.push_back({table.table_index, s, p, hit_target});
                        if (hit_target) {
                            out.found = x;
                            out.found_at = FoundAt{table.table_index, s, rec.sp};
                            return out;
                        }
                        ++counters.false_alarms;
                    }
                }
            }
        }
        return out;
    }

private:
    SpaceParams params_;
    SearchOptions options_;
    std::vector<const PrecompTable*> ordered_;
    std::vector<ChainStepper> steppers_;
};

inline SearchOutcome search(Point y_star, std::span<const PrecompTable> tables, SearchOptions options = {}) {
    return OnlineSearcher(tables, options).search(y_star);
}

/// f-invocations the cost model predicts for `out` in default (full walk)
/// mode: (s-1) per table walk performed, plus p per alarm. Requires the
/// alarm list.
inline std::uint64_t modelled_invocations(const SearchOutcome& out, const OnlineSearcher& searcher) {
    const std::uint64_t l = searcher.table_count();
    const std::uint64_t last = out.counters.iterations_executed;
    std::uint64_t walks = 0;
    for (std::uint64_t s = 1; s < last; ++s) walks += l * (s - 1);
    if (last > 0) {
        const std::uint64_t tables_in_last = out.found_at ? searcher.rank_of(out.found_at->table_index) + 1 : l;
        walks += tables_in_last * (last - 1);
    }
    std::uint64_t regen = 0;
    for (const auto& a : out.alarms) regen += a.position;
    return walks + regen;
}

struct BatchStats {
    std::size_t n_targets = 0;
    std::size_t found = 0;
    double success_rate = 0.0;
    double mean_invocations = 0.0;
    double mean_alarms = 0.0;
    double mean_false_alarms = 0.0;
    CounterSet totals;
};

struct BatchResult {
    std::vector<SearchOutcome> outcomes;
    BatchStats stats;
};

inline BatchStats aggregate(std::span<const SearchOutcome> outcomes) {
    BatchStats st;
    st.n_targets = outcomes.size();
    for (const auto& o : outcomes) {
        st.totals += o.counters;
        if (o.found) ++st.found;
    }
    if (st.n_targets > 0) {
        const double n = static_cast<double>(st.n_targets);
        st.success_rate = static_cast<double>(st.found) / n;
        st.mean_invocations = static_cast<double>(st.totals.f_invocations) / n;
        st.mean_alarms = static_cast<double>(st.totals.alarms) / n;
        st.mean_false_alarms = static_cast<double>(st.totals.false_alarms) / n;
    }
    return st;
}

/// Independent searches, one per target; outcome k belongs to targets[k]
/// regardless of the worker count.
inline BatchResult batch_search(std::span<const Point> targets, const OnlineSearcher& searcher, unsigned workers = 1) {
    BatchResult res;
    res.outcomes.resize(targets.size());
    parallel_blocks(targets.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t k = begin; k < end; ++k) res.outcomes[k] = searcher.search(targets[k]);
    });
    res.stats = aggregate(res.outcomes);
    return res;
}

} // namespace rdp
