#pragma once

// Measurement harness: builds tables, searches f-images of uniform points and
// sets every measured quantity beside its analytic prediction.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdp/baselines.hpp"
#include "rdp/offline.hpp"
#include "rdp/online.hpp"
#include "rdp/theory.hpp"

namespace rdp::experiment {

inline constexpr int kReportSchemaVersion = 1;

/// x_k uniform in [0, N) from mt19937_64(seed) (raw output masked to n_bits),
/// target y_k = f(x_k). These evaluations are not part of any search cost.
inline std::vector<Point> make_targets(std::size_t n_targets, std::uint64_t target_seed, std::string_view function_id,
                                       int n_bits) {
    std::mt19937_64 rng(target_seed);
    const OneWayFunction f(function_id, n_bits);
    const std::uint64_t mask = (std::uint64_t{1} << n_bits) - 1;
    std::vector<Point> targets;
    targets.reserve(n_targets);
    CounterSet scratch;
    for (std::size_t k = 0; k < n_targets; ++k) targets.push_back(f(Point{rng() & mask}, scratch));
    return targets;
}

/// The five headline quantities of a run.
struct Quantities {
    double precomp_invocations = 0.0;
    double chains_stored = 0.0;
    double success_rate = 0.0;
    double mean_online_invocations = 0.0;
    double mean_false_alarms = 0.0;
};

struct TargetRecord {
    Point target;
    bool found = false;
    std::uint64_t invocations = 0;
    std::uint64_t alarms = 0;
    std::uint64_t false_alarms = 0;
    /// Iteration of the successful alarm; 0 when not found.
    std::uint64_t iteration_found = 0;
};

struct ExperimentReport {
    SpaceParams params;
    std::size_t n_targets = 0;
    std::uint64_t target_seed = 0;
    bool break_at_first_dp = false;
    Quantities measured;
    Quantities predicted;
    /// (measured - predicted) / predicted.
    Quantities relative_deltas;
    std::vector<TargetRecord> per_target;
};

struct ExperimentOptions {
    unsigned workers = 1;
    StartPointScheme scheme = StartPointScheme::SeededMix;
    SearchOptions search{};
    bool keep_per_target = true;
};

inline Quantities relative_deltas(const Quantities& m, const Quantities& p) {
    auto rel = [](double a, double b) { return b == 0.0 ? 0.0 : (a - b) / b; };
    return {rel(m.precomp_invocations, p.precomp_invocations), rel(m.chains_stored, p.chains_stored),
            rel(m.success_rate, p.success_rate), rel(m.mean_online_invocations, p.mean_online_invocations),
            rel(m.mean_false_alarms, p.mean_false_alarms)};
}

inline Quantities predict(const SpaceParams& params) {
    const auto in = theory::TheoryInputs::from_params(params);
    const auto r = theory::make_report(in);
    return {*r.precomp_invocations, *r.M, r.success_p, *r.expected_T, *r.expected_total_false_alarms};
}

inline ExperimentReport run_experiment(const SpaceParams& params, std::size_t n_targets, std::uint64_t target_seed,
                                       const ExperimentOptions& options = {}) {
    params.validate();
    if (n_targets < 1) throw ConfigError("n_targets must be at least 1");

    BuildOptions build;
    build.scheme = options.scheme;
    build.workers = options.workers;
    const auto tables = build_tables(params, build);

    const auto targets = make_targets(n_targets, target_seed, params.function_id, params.n_bits);
    SearchOptions search = options.search;
    search.record_alarms = false;
    const OnlineSearcher searcher(tables, search);
    const auto batch = batch_search(targets, searcher, options.workers);

    ExperimentReport rep;
    rep.params = params;
    rep.n_targets = n_targets;
    rep.target_seed = target_seed;
    rep.break_at_first_dp = search.break_at_first_dp;
    for (const auto& t : tables) {
        rep.measured.precomp_invocations += static_cast<double>(t.precomp_invocations);
        rep.measured.chains_stored += static_cast<double>(t.m0());
    }
    rep.measured.success_rate = batch.stats.success_rate;
    rep.measured.mean_online_invocations = batch.stats.mean_invocations;
    rep.measured.mean_false_alarms = batch.stats.mean_false_alarms;
    rep.predicted = predict(params);
    rep.relative_deltas = relative_deltas(rep.measured, rep.predicted);

    if (options.keep_per_target) {
        rep.per_target.reserve(n_targets);
        for (std::size_t k = 0; k < n_targets; ++k) {
            const auto& o = batch.outcomes[k];
            rep.per_target.push_back({targets[k], o.found.has_value(), o.counters.f_invocations, o.counters.alarms,
                                      o.counters.false_alarms, o.found_at ? o.found_at->iteration : 0});
        }
    }
    return rep;
}

/// Distinct-value count of one matrix column against the column model.
struct ColumnCount {
    std::uint32_t column = 0;
    std::uint64_t measured_before = 0;
    std::uint64_t measured_after = 0;
    double predicted_tilde = 0.0;
    double predicted_m = 0.0;
    double rel_err_before = 0.0;
    double rel_err_after = 0.0;
};

/// Builds table 0 while recording which values occupy each sampled column
/// (column 0 holds the starting points, column j the value after j steps).
/// "Before" counts every chain still running at column j, including chains
/// later discarded; "after" counts only the f-inputs of chains that reached
/// a DP in time, so a chain's own ending point is left out.
inline std::vector<ColumnCount> validate_column_counts(const SpaceParams& params, std::vector<std::uint32_t> sample_columns,
                                                StartPointScheme scheme = StartPointScheme::SeededMix) {
    params.validate();
    if (params.n_bits > 22) throw ConfigError("validate_column_counts needs N <= 2^22");
    std::sort(sample_columns.begin(), sample_columns.end());
    for (auto col : sample_columns)
        if (col > params.t_hat) throw ConfigError("sample column beyond t_hat");

    const std::size_t n = params.N();
    const std::size_t n_cols = sample_columns.size();
    std::vector<std::vector<bool>> before(n_cols, std::vector<bool>(n)), after(n_cols, std::vector<bool>(n));
    const ChainStepper stepper(params, 0);
    const auto starts = generate_start_points(params.m0_tilde, 0, params.seed, params.n_bits, scheme);

    CounterSet counters;
    std::vector<std::uint64_t> values(n_cols);
    std::vector<bool> present(n_cols);
    for (Point sp : starts) {
        std::fill(present.begin(), present.end(), false);
        Point x = sp;
        std::size_t next = 0;
        std::uint32_t end_col = 0;
        for (std::uint32_t col = 0; col <= params.t_hat; ++col) {
            if (col > 0) x = stepper.step(col, x, counters);
            while (next < n_cols && sample_columns[next] == col) {
                values[next] = x.value;
                present[next] = true;
                ++next;
            }
            if (col > 0 && stepper.is_dp(x)) {
                end_col = col;
                break;
            }
        }
        for (std::size_t k = 0; k < n_cols; ++k) {
            if (!present[k]) continue;
            before[k][values[k]] = true;
            if (sample_columns[k] < end_col) after[k][values[k]] = true;
        }
    }

    const auto in = theory::TheoryInputs::from_params(params);
    std::vector<ColumnCount> out;
    for (std::size_t k = 0; k < n_cols; ++k) {
        ColumnCount cc;
        cc.column = sample_columns[k];
        cc.measured_before = static_cast<std::uint64_t>(std::count(before[k].begin(), before[k].end(), true));
        cc.measured_after = static_cast<std::uint64_t>(std::count(after[k].begin(), after[k].end(), true));
        cc.predicted_tilde = theory::m_tilde(cc.column, in);
        cc.predicted_m = std::max(0.0, theory::m_col(cc.column, in));
        cc.rel_err_before = (cc.measured_before - cc.predicted_tilde) / cc.predicted_tilde;
        cc.rel_err_after = cc.predicted_m > 0.0 ? (cc.measured_after - cc.predicted_m) / cc.predicted_m : 0.0;
        out.push_back(cc);
    }
    return out;
}

/// One configuration taking part in a comparison.
struct MethodSpec {
    Method method = Method::RainbowDp;
    SpaceParams rainbow_dp;
    BaselineConfig baseline;
};

struct ComparisonRow {
    Method method = Method::RainbowDp;
    double N = 0.0;
    /// Stored records over all tables.
    double M = 0.0;
    double precomp_invocations = 0.0;
    double success_rate = 0.0;
    double mean_online_invocations = 0.0;
    double mean_false_alarms = 0.0;
    /// Measured T M^2 / N^2.
    double empirical_D_tcr = 0.0;
};

struct ComparisonReport {
    std::size_t n_targets = 0;
    std::uint64_t target_seed = 0;
    std::vector<ComparisonRow> rows;
    std::vector<ReferenceCoefficient> references;
};

inline ComparisonReport compare_methods(const std::vector<MethodSpec>& specs, std::size_t n_targets,
                                        std::uint64_t target_seed, unsigned workers = 1) {
    if (n_targets < 1) throw ConfigError("n_targets must be at least 1");
    ComparisonReport rep;
    rep.n_targets = n_targets;
    rep.target_seed = target_seed;
    rep.references = reference_coefficients();
    for (const auto& spec : specs) {
        ComparisonRow row;
        row.method = spec.method;
        BatchStats stats;
        if (spec.method == Method::RainbowDp) {
            const auto& p = spec.rainbow_dp;
            BuildOptions build;
            build.workers = workers;
            const auto tables = build_tables(p, build);
            for (const auto& t : tables) {
                row.M += static_cast<double>(t.m0());
                row.precomp_invocations += static_cast<double>(t.precomp_invocations);
            }
            row.N = static_cast<double>(p.N());
            const auto targets = make_targets(n_targets, target_seed, p.function_id, p.n_bits);
            stats = batch_search(targets, OnlineSearcher(tables, {false, false}), workers).stats;
        } else {
            const auto& cfg = spec.baseline;
            if (cfg.method != spec.method) throw ConfigError("method tag does not match baseline configuration");
            const auto tables = build_baseline(cfg);
            for (const auto& t : tables) {
                row.M += static_cast<double>(t.records.size());
                row.precomp_invocations += static_cast<double>(t.precomp_invocations);
            }
            row.N = static_cast<double>(cfg.N());
            const auto targets = make_targets(n_targets, target_seed, cfg.function_id, cfg.n_bits);
            stats = batch_search_baseline(targets, tables, workers).stats;
        }
        row.success_rate = stats.success_rate;
        row.mean_online_invocations = stats.mean_invocations;
        row.mean_false_alarms = stats.mean_false_alarms;
        row.empirical_D_tcr = row.mean_online_invocations * row.M * row.M / (row.N * row.N);
        rep.rows.push_back(row);
    }
    return rep;
}

/// Desk-scale matched comparison at N = 2^n_bits: rainbow-dp with l=2,
/// c=2.04, t=128 (at D_pc=3 its optimal 80% configuration) against a single
/// rainbow table and Hellman / Hellman-DP sets holding the same number of
/// records. The rainbow table length is set so its model coverage
/// 1 - (1 + m t / 2N)^-2 equals `rainbow_coverage`. Order: rainbow-dp,
/// rainbow, hellman, hellman-dp.
///
/// Measured success on f-image targets runs above the coverage models; at
/// N=2^20, d_pc=1.6 with rainbow_coverage=0.62 measures about 80% for both.
inline std::vector<MethodSpec> desk_comparison_specs(int n_bits = 20, std::uint64_t seed = 0x5eed,
                                                     const std::string& function_id = "prf-test", double d_pc = 3.0,
                                                     double rainbow_coverage = 0.8) {
    if (!(d_pc > 0.0) || !(rainbow_coverage > 0.0 && rainbow_coverage < 1.0))
        throw ConfigError("comparison needs d_pc > 0 and rainbow coverage in (0, 1)");
    const int k_bits = 7;
    const double c = 2.04;
    const std::uint32_t l = 2;
    const double n = std::ldexp(1.0, n_bits);
    const double t = std::ldexp(1.0, k_bits);
    const auto m0_tilde = static_cast<std::uint64_t>(std::llround(d_pc * n / (l * t * (1.0 - std::exp(-c)))));

    std::vector<MethodSpec> specs;
    MethodSpec rdp;
    rdp.method = Method::RainbowDp;
    rdp.rainbow_dp = SpaceParams::make(n_bits, k_bits, c, l, m0_tilde, seed, function_id);
    specs.push_back(rdp);

    const double memory = l * m0_tilde * (1.0 - std::exp(-c));
    MethodSpec rainbow;
    rainbow.method = Method::Rainbow;
    rainbow.baseline.method = Method::Rainbow;
    rainbow.baseline.m = static_cast<std::uint64_t>(std::llround(memory));
    rainbow.baseline.t = static_cast<std::uint64_t>(
        std::max(1LL, std::llround((1.0 / std::sqrt(1.0 - rainbow_coverage) - 1.0) * 2.0 * n / memory)));
    rainbow.baseline.l = 1;
    rainbow.baseline.n_bits = n_bits;
    rainbow.baseline.seed = seed;
    rainbow.baseline.function_id = function_id;
    specs.push_back(rainbow);

    // Hellman: D_pc ~ 2.17 and T ~ 3.11 N^2 / M^2 ~ l*t.
    MethodSpec hellman;
    hellman.method = Method::Hellman;
    hellman.baseline.method = Method::Hellman;
    hellman.baseline.t = static_cast<std::uint64_t>(std::llround(2.1733 * n / memory));
    hellman.baseline.l =
        static_cast<std::uint32_t>(std::max(1LL, std::llround(3.11 * n * n / (memory * memory) / hellman.baseline.t)));
    hellman.baseline.m = static_cast<std::uint64_t>(std::llround(memory / hellman.baseline.l));
    hellman.baseline.n_bits = n_bits;
    hellman.baseline.seed = seed;
    hellman.baseline.function_id = function_id;
    specs.push_back(hellman);

    // Hellman-DP with t = 2^k_bits, bound 4t: T ~ 11.58 N^2 / M^2 ~ l*t.
    MethodSpec hdp;
    hdp.method = Method::HellmanDp;
    hdp.baseline.method = Method::HellmanDp;
    hdp.baseline.k_bits = k_bits;
    hdp.baseline.t = std::uint64_t{1} << k_bits;
    hdp.baseline.c = 4.0;
    hdp.baseline.l = static_cast<std::uint32_t>(std::max(1LL, std::llround(11.58 * n * n / (memory * memory) / t)));
    hdp.baseline.m = static_cast<std::uint64_t>(std::llround(memory / hdp.baseline.l / (1.0 - std::exp(-4.0))));
    hdp.baseline.n_bits = n_bits;
    hdp.baseline.seed = seed;
    hdp.baseline.function_id = function_id;
    specs.push_back(hdp);
    return specs;
}

// ---- report writers -------------------------------------------------------

inline nlohmann::ordered_json to_json(const Quantities& q) {
    return {{"precomp_invocations", q.precomp_invocations}, {"chains_stored", q.chains_stored},
            {"success_rate", q.success_rate},               {"mean_online_invocations", q.mean_online_invocations},
            {"mean_false_alarms", q.mean_false_alarms}};
}

inline nlohmann::ordered_json to_json(const SpaceParams& p) {
    return {{"n_bits", p.n_bits}, {"k_bits", p.k_bits}, {"N", p.N()},       {"t", p.t()},
            {"c", p.c},           {"t_hat", p.t_hat},   {"l", p.l},         {"m0_tilde", p.m0_tilde},
            {"seed", p.seed},     {"function_id", p.function_id}};
}

inline nlohmann::ordered_json to_json(const ExperimentReport& r) {
    nlohmann::ordered_json config = to_json(r.params);
    config["n_targets"] = r.n_targets;
    config["target_seed"] = r.target_seed;
    config["break_at_first_dp"] = r.break_at_first_dp;
    return {{"schema", "rdp-experiment-report"},
            {"schema_version", kReportSchemaVersion},
            {"config", config},
            {"measured", to_json(r.measured)},
            {"predicted", to_json(r.predicted)},
            {"relative_deltas", to_json(r.relative_deltas)}};
}

inline constexpr const char* kTargetCsvHeader = "target,found,invocations,alarms,false_alarms,iteration_found";

inline void write_target_csv(std::ostream& os, const std::vector<TargetRecord>& rows) {
    os << kTargetCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.target.value << ',' << (r.found ? 1 : 0) << ',' << r.invocations << ',' << r.alarms << ','
           << r.false_alarms << ',' << r.iteration_found << '\n';
}

inline nlohmann::ordered_json to_json(const ComparisonReport& r) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"method", method_name(row.method)},
                        {"N", row.N},
                        {"M", row.M},
                        {"precomp_invocations", row.precomp_invocations},
                        {"D_pc_measured", row.precomp_invocations / row.N},
                        {"success_rate", row.success_rate},
                        {"mean_online_invocations", row.mean_online_invocations},
                        {"mean_false_alarms", row.mean_false_alarms},
                        {"empirical_D_tcr", row.empirical_D_tcr}});
    nlohmann::ordered_json refs = nlohmann::ordered_json::array();
    for (const auto& ref : r.references)
        refs.push_back({{"method", method_name(ref.method)},
                        {"success_p", ref.success_p},
                        {"D_pc", ref.D_pc},
                        {"D_tcr", ref.D_tcr}});
    return {{"schema", "rdp-comparison-report"},
            {"schema_version", kReportSchemaVersion},
            {"n_targets", r.n_targets},
            {"target_seed", r.target_seed},
            {"rows", rows},
            {"published_coefficients", refs}};
}

} // namespace rdp::experiment
