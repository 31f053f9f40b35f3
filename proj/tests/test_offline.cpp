#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rdp/offline.hpp"

using namespace rdp;

namespace {

SpaceParams desk(std::uint64_t m0_tilde = 4096, std::uint32_t l = 2) {
    return SpaceParams::make(16, 6, 1.8, l, m0_tilde, 77, "prf-test");
}

// Independent chain oracle: plain loop over the formula, no stepper.
std::optional<ChainRecord> oracle_chain(std::uint32_t i, Point sp, const SpaceParams& p) {
    const std::uint64_t dp_limit = p.N() / p.t();
    std::uint64_t x = sp.value;
    for (std::uint32_t s = 1; s <= p.t_hat; ++s) {
        x = ((mix64(mix64(x ^ kPrfTestKey)) & p.mask()) + std::uint64_t(i) * p.t_hat + s) % p.N();
        if (x < dp_limit) return ChainRecord{sp, s, Point{x}};
    }
    return std::nullopt;
}

} // namespace

TEST(StartPoints, DistinctAndDeterministic) {
    const auto a = generate_start_points(5000, 0, 42, 14);
    ASSERT_EQ(a.size(), 5000u);
    std::set<std::uint64_t> uniq;
    for (auto p : a) {
        ASSERT_LT(p.value, 1u << 14);
        uniq.insert(p.value);
    }
    EXPECT_EQ(uniq.size(), a.size());
    EXPECT_EQ(a, generate_start_points(5000, 0, 42, 14));
    EXPECT_NE(a, generate_start_points(5000, 1, 42, 14));
    EXPECT_NE(a, generate_start_points(5000, 0, 43, 14));
}

TEST(StartPoints, FullSpaceAndOverflow) {
    const auto all = generate_start_points(1024, 0, 1, 10);
    std::set<std::uint64_t> uniq;
    for (auto p : all) uniq.insert(p.value);
    EXPECT_EQ(uniq.size(), 1024u);
    EXPECT_THROW(generate_start_points(1025, 0, 1, 10), ConfigError);
}

TEST(StartPoints, Sequential) {
    const auto s = generate_start_points(10, 3, 99, 12, StartPointScheme::Sequential);
    for (std::uint64_t j = 0; j < 10; ++j) EXPECT_EQ(s[j].value, j);
}

TEST(BuildChain, MatchesOracleAndCounts) {
    const auto p = desk();
    for (std::uint32_t i = 0; i < p.l; ++i) {
        for (std::uint64_t x = 0; x < 2000; ++x) {
            CounterSet c;
            const auto got = build_chain(i, Point{x}, p, c);
            const auto want = oracle_chain(i, Point{x}, p);
            ASSERT_EQ(got.has_value(), want.has_value()) << x;
            if (got) {
                EXPECT_EQ(got->len, want->len);
                EXPECT_EQ(got->ep, want->ep);
                EXPECT_EQ(c.f_invocations, got->len);
            } else {
                EXPECT_EQ(c.f_invocations, p.t_hat);
            }
        }
    }
}

TEST(BuildChain, ImmediateDp) {
    const auto p = desk();
    int seen = 0;
    for (std::uint64_t x = 0; x < p.N() && seen < 5; ++x) {
        CounterSet c;
        if (!is_dp(step(0, 1, Point{x}, p, c), p)) continue;
        const auto r = build_chain(0, Point{x}, p, c);
        ASSERT_TRUE(r);
        EXPECT_EQ(r->len, 1u);
        ++seen;
    }
    EXPECT_EQ(seen, 5);
}

TEST(BuildTable, RecordInvariantsAndOrder) {
    const auto p = desk();
    const auto t = build_table(1, p);
    ASSERT_GT(t.m0(), 0u);
    EXPECT_LE(t.m0(), p.m0_tilde);
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        const auto& r = t.records[k];
        ASSERT_GE(r.len, 1u);
        ASSERT_LE(r.len, p.t_hat);
        ASSERT_TRUE(is_dp(r.ep, p));
        CounterSet c;
        ASSERT_TRUE(verify_record(r, 1, p, c));
        const auto again = oracle_chain(1, r.sp, p);
        ASSERT_TRUE(again);
        ASSERT_EQ(again->len, r.len);
        ASSERT_EQ(again->ep, r.ep);
        if (k > 0) {
            ASSERT_FALSE(record_less(r, t.records[k - 1]));
        }
    }
    // length index partitions the records
    ASSERT_EQ(t.length_index.size(), p.t_hat + 2u);
    EXPECT_EQ(t.length_index.front(), 0u);
    EXPECT_EQ(t.length_index.back(), t.records.size());
    for (std::uint32_t len = 1; len <= p.t_hat; ++len)
        for (std::size_t k = t.length_index[len]; k < t.length_index[len + 1]; ++k) ASSERT_EQ(t.records[k].len, len);
}

TEST(BuildTable, InvocationCountIsExact) {
    const auto p = desk(2000, 1);
    const auto t = build_table(0, p);
    std::uint64_t expect = 0;
    for (auto sp : generate_start_points(p.m0_tilde, 0, p.seed, p.n_bits)) {
        const auto r = oracle_chain(0, sp, p);
        expect += r ? r->len : p.t_hat;
    }
    EXPECT_EQ(t.precomp_invocations, expect);
}

TEST(BuildTable, VerifyRejectsTamperedRecord) {
    const auto p = desk();
    auto t = build_table(0, p);
    auto r = t.records.front();
    CounterSet c;
    r.ep.value ^= 1;
    EXPECT_FALSE(verify_record(r, 0, p, c));
    r = t.records.front();
    EXPECT_FALSE(verify_record(r, 1, p, c));
    r.len = p.t_hat + 1;
    EXPECT_FALSE(verify_record(r, 0, p, c));
}

TEST(BuildTable, IndependentOfWorkerCount) {
    const auto p = desk(20000, 1);
    const auto one = build_table(0, p, {StartPointScheme::SeededMix, 1});
    const auto four = build_table(0, p, {StartPointScheme::SeededMix, 4});
    const auto seven = build_table(0, p, {StartPointScheme::SeededMix, 7});
    EXPECT_EQ(one, four);
    EXPECT_EQ(one, seven);
    EXPECT_EQ(one, build_table(0, p));
}

TEST(BuildTable, KeepsDuplicateEndpoints) {
    // Dense table: many chains merge, none are removed.
    const auto p = SpaceParams::make(12, 4, 1.8, 1, 4096, 5, "prf-test");
    const auto t = build_table(0, p, {StartPointScheme::Sequential});
    std::size_t survivors = 0;
    for (std::uint64_t x = 0; x < p.N(); ++x) survivors += oracle_chain(0, Point{x}, p).has_value();
    EXPECT_EQ(t.m0(), survivors);
    std::set<std::pair<std::uint32_t, std::uint64_t>> distinct;
    for (auto& r : t.records) distinct.insert({r.len, r.ep.value});
    EXPECT_LT(distinct.size(), t.m0());
}

TEST(BuildTable, ZeroSurvivorsIsAnError) {
    // t = 2048 over N = 4096 with t_hat = 1: at most 2 DPs exist.
    const auto p = SpaceParams::make(12, 11, 0.0005, 1, 1, 1, "prf-test");
    ASSERT_EQ(p.t_hat, 1u);
    CounterSet c;
    ASSERT_FALSE(build_chain(0, Point{0}, p, c).has_value());
    EXPECT_THROW(build_table(0, p, {StartPointScheme::Sequential}), BuildError);
}

TEST(BuildTable, TableIndexContract) {
    const auto p = desk(100, 2);
    EXPECT_THROW(build_table(2, p), ContractViolation);
    EXPECT_EQ(build_tables(p).size(), 2u);
}

TEST(BuildTable, DiscardFractionNearModel) {
    const auto p = SpaceParams::make(24, 9, 1.8, 1, 1u << 18, 0x5eed, "md5-trunc");
    const auto t = build_table(0, p, {StartPointScheme::SeededMix, 0});
    const double m = double(p.m0_tilde);
    const double discard = 1.0 - double(t.m0()) / m;
    EXPECT_NEAR(discard, std::exp(-1.8), 0.005);
    EXPECT_NEAR(double(t.m0()) / (m * (1.0 - std::exp(-1.8))), 1.0, 0.005);
}

TEST(BuildTable, SurvivorsWithinBinomialBand) {
    // Sparse table (m0_tilde * t << N) so chains rarely meet.
    const auto p = SpaceParams::make(30, 9, 1.8, 1, 1u << 16, 0x5eed, "prf-test");
    const auto t = build_table(0, p, {StartPointScheme::SeededMix, 0});
    const double m = double(p.m0_tilde);
    const double q = 1.0 - std::pow(1.0 - 1.0 / double(p.t()), double(p.t_hat));
    const double sigma = std::sqrt(m * q * (1.0 - q));
    EXPECT_LE(std::abs(double(t.m0()) - m * q), 3.0 * sigma);

    // cost ~ m0_tilde * E[min(len, t_hat)] = m0_tilde * t * q
    EXPECT_NEAR(double(t.precomp_invocations) / (m * double(p.t()) * q), 1.0, 0.01);
}
