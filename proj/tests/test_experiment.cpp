#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rdp/experiment.hpp"

using namespace rdp;
using namespace rdp::experiment;

namespace {

SpaceParams desk(std::uint64_t seed = 17) { return SpaceParams::make(16, 5, 1.8, 2, 4000, seed, "prf-test"); }

} // namespace

TEST(ColumnModel, ColumnCountsMatchModel) {
    // m0_tilde * t / N = 8 at N = 2^20, t = 128.
    const auto p = SpaceParams::make(20, 7, 3.0, 1, 65536, 0x5eed, "prf-test");
    const auto cols = validate_column_counts(p, {0, 64, 128, 256, 383});
    ASSERT_EQ(cols.size(), 5u);
    EXPECT_EQ(cols[0].measured_before, p.m0_tilde);
    for (std::size_t k = 1; k <= 3; ++k) {
        EXPECT_LT(std::abs(cols[k].rel_err_before), 0.03) << cols[k].column << " " << cols[k].measured_before << " "
                                                         << cols[k].predicted_tilde;
        EXPECT_LT(std::abs(cols[k].rel_err_after), 0.05) << cols[k].column << " " << cols[k].measured_after << " "
                                                        << cols[k].predicted_m;
        EXPECT_LE(cols[k].measured_after, cols[k].measured_before);
    }
}

TEST(ColumnModel, AfterDiscardNearZeroAtLastColumn) {
    // A handful of survivors per table, so pool 40 tables.
    double measured = 0.0, bound = 0.0, before = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto p = SpaceParams::make(20, 7, 3.0, 1, 65536, seed, "prf-test");
        const auto col = validate_column_counts(p, {383}).front();
        measured += double(col.measured_after);
        before += double(col.measured_before);
        bound += col.predicted_tilde * (1.0 - std::exp(383.0 / 128.0 - 3.0)) * 1.2;
    }
    EXPECT_LT(measured, bound);
    EXPECT_LT(measured, 0.02 * before);
}

TEST(ColumnModel, Rejections) {
    EXPECT_THROW(validate_column_counts(SpaceParams::make(23, 7, 2.0, 1, 100, 1, "prf-test"), {1}), ConfigError);
    EXPECT_THROW(validate_column_counts(desk(), {1000}), ConfigError);
}

TEST(Experiment, DeterministicReports) {
    const auto a = run_experiment(desk(), 300, 99);
    const auto b = run_experiment(desk(), 300, 99, {.workers = 3});
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    ASSERT_EQ(a.per_target.size(), 300u);
    for (std::size_t k = 0; k < 300; ++k) {
        EXPECT_EQ(a.per_target[k].target, b.per_target[k].target);
        EXPECT_EQ(a.per_target[k].invocations, b.per_target[k].invocations);
    }
    const auto c = run_experiment(desk(), 300, 100);
    EXPECT_NE(to_json(a).dump(), to_json(c).dump());
}

TEST(Experiment, MeasuredSideIsConsistent) {
    const auto rep = run_experiment(desk(), 400, 5);
    double found = 0, inv = 0, fa = 0;
    for (const auto& r : rep.per_target) {
        found += r.found;
        inv += double(r.invocations);
        fa += double(r.false_alarms);
        EXPECT_EQ(r.found, r.iteration_found > 0);
        EXPECT_EQ(r.alarms, r.false_alarms + (r.found ? 1 : 0));
    }
    EXPECT_DOUBLE_EQ(rep.measured.success_rate, found / 400);
    EXPECT_DOUBLE_EQ(rep.measured.mean_online_invocations, inv / 400);
    EXPECT_DOUBLE_EQ(rep.measured.mean_false_alarms, fa / 400);
    EXPECT_GE(rep.measured.success_rate, 0.0);
    EXPECT_LE(rep.measured.success_rate, 1.0);
    EXPECT_NEAR(rep.relative_deltas.chains_stored,
                (rep.measured.chains_stored - rep.predicted.chains_stored) / rep.predicted.chains_stored, 1e-15);
}

TEST(Experiment, OfflineSideFollowsModel) {
    const auto rep = run_experiment(SpaceParams::make(20, 7, 1.8, 1, 20000, 3, "prf-test"), 1, 1);
    EXPECT_LT(std::abs(rep.relative_deltas.chains_stored), 0.02);
    EXPECT_LT(std::abs(rep.relative_deltas.precomp_invocations), 0.02);
}

TEST(Experiment, TargetsAreImagesOfUniformPoints) {
    const auto t = make_targets(5, 42, "prf-test", 16);
    std::mt19937_64 rng(42);
    for (const auto& y : t) EXPECT_EQ(y.value, mix64(mix64((rng() & 0xffff) ^ kPrfTestKey)) & 0xffff);
}

TEST(Experiment, RejectsZeroTargets) {
    EXPECT_THROW(run_experiment(desk(), 0, 1), ConfigError);
    EXPECT_THROW(compare_methods(desk_comparison_specs(16), 0, 1), ConfigError);
}

TEST(Report, JsonSchema) {
    const auto rep = run_experiment(desk(), 50, 3);
    const auto j = to_json(rep);
    EXPECT_EQ(j["schema"], "rdp-experiment-report");
    EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
    for (const char* key : {"n_bits", "k_bits", "N", "t", "c", "t_hat", "l", "m0_tilde", "seed", "function_id",
                            "n_targets", "target_seed", "break_at_first_dp"})
        EXPECT_TRUE(j["config"].contains(key)) << key;
    for (const char* side : {"measured", "predicted", "relative_deltas"}) {
        ASSERT_TRUE(j.contains(side));
        EXPECT_EQ(j[side].size(), 5u);
        for (const char* key : {"precomp_invocations", "chains_stored", "success_rate", "mean_online_invocations",
                                "mean_false_alarms"})
            EXPECT_TRUE(j[side][key].is_number()) << side << "." << key;
    }
    EXPECT_EQ(nlohmann::ordered_json::parse(j.dump()), j);
}

TEST(Report, TargetCsv) {
    const auto rep = run_experiment(desk(), 20, 3);
    std::ostringstream os;
    write_target_csv(os, rep.per_target);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "target,found,invocations,alarms,false_alarms,iteration_found");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
        ++rows;
    }
    EXPECT_EQ(rows, 20u);
}

TEST(Compare, OneRowPerMethodWithReferences) {
    const auto specs = desk_comparison_specs(20);
    ASSERT_EQ(specs.size(), 4u);
    const auto rep = compare_methods(specs, 100, 8);
    ASSERT_EQ(rep.rows.size(), 4u);
    EXPECT_EQ(rep.rows[0].method, Method::RainbowDp);
    EXPECT_EQ(rep.rows[1].method, Method::Rainbow);
    EXPECT_EQ(rep.rows[2].method, Method::Hellman);
    EXPECT_EQ(rep.rows[3].method, Method::HellmanDp);
    EXPECT_EQ(rep.references.size(), 8u);
    for (const auto& r : rep.rows)
        EXPECT_NEAR(r.empirical_D_tcr, r.mean_online_invocations * r.M * r.M / (r.N * r.N), 1e-9 * r.empirical_D_tcr);
    // Memory is matched within a few percent.
    for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(rep.rows[k].M / rep.rows[0].M, 1.0, 0.05) << k;
    const auto j = to_json(rep);
    EXPECT_EQ(j["schema"], "rdp-comparison-report");
    EXPECT_EQ(j["rows"].size(), 4u);
    EXPECT_EQ(j["published_coefficients"].size(), 8u);

    auto bad = specs;
    bad[1].method = Method::Hellman;
    EXPECT_THROW(compare_methods(bad, 10, 1), ConfigError);
}
