#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rdp/storage.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run rdp_cli(const std::string& args) {
    const std::string cmd = std::string(RDP_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("rdp_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string hex(std::uint64_t v, int n_bits) {
    std::ostringstream os;
    os << std::hex << v;
    std::string s = os.str();
    const std::size_t width = std::size_t(n_bits + 3) / 4;
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

const std::string kSmallBuild = "build --n-bits 14 --k-bits 4 --m0 500 --tables 2 --fn prf-test";

} // namespace

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(rdp_cli("").code, 1);
    EXPECT_EQ(rdp_cli("bogus").code, 1);
    EXPECT_EQ(rdp_cli("theory --no-such-flag").code, 1);
    EXPECT_EQ(rdp_cli("theory --k-bits 9 --t 512").code, 1);
    EXPECT_EQ(rdp_cli("search --tables /tmp").code, 1);
    EXPECT_EQ(rdp_cli("optimize --dpc 3").code, 1);
    EXPECT_EQ(rdp_cli("theory --help").code, 0);
}

TEST(Cli, InvalidBuildWritesNothing) {
    const auto dir = scratch("invalid");
    const auto r = rdp_cli("build --n-bits 10 --k-bits 10 --out " + dir.string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("k_bits"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir));
    EXPECT_EQ(rdp_cli("build --n-bits 12 --k-bits 4 --m0 5000 --out " + dir.string()).code, 1);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, BuildFailureIsRuntimeError) {
    const auto dir = scratch("runtime");
    const auto r = rdp_cli("build --n-bits 12 --k-bits 11 --c 0.0005 --m0 10 --fn prf-test --out " + dir.string());
    EXPECT_EQ(r.code, 3) << r.out;
}

TEST(Cli, BuildThenSearchFindsStoredElement) {
    const auto dir = scratch("roundtrip");
    const auto b = rdp_cli(kSmallBuild + " --format json --out " + dir.string());
    ASSERT_EQ(b.code, 0) << b.out;
    const auto summary = nlohmann::json::parse(b.out);
    EXPECT_EQ(summary["tables"], 2);
    ASSERT_TRUE(fs::exists(dir / "table_000.rdpt"));
    ASSERT_TRUE(fs::exists(dir / "table_001.rdpt"));

    const auto t = rdp::storage::load(dir / "table_001.rdpt");
    EXPECT_EQ(summary["chains_stored"].get<std::uint64_t>(),
              t.records.size() + rdp::storage::load(dir / "table_000.rdpt").records.size());
    const rdp::OneWayFunction f(t.params);
    rdp::CounterSet c;
    const auto y = f(t.records[t.records.size() / 2].sp, c);
    const auto s = rdp_cli("search --format json --tables " + dir.string() + " --target " + hex(y.value, 14));
    ASSERT_EQ(s.code, 0) << s.out;
    const auto j = nlohmann::json::parse(s.out);
    ASSERT_EQ(j["outcomes"].size(), 1u);
    const auto found = j["outcomes"][0]["found"];
    ASSERT_TRUE(found.is_string()) << s.out;
    EXPECT_EQ(f(rdp::Point{std::stoull(found.get<std::string>(), nullptr, 16)}, c), y);
    EXPECT_EQ(j["outcomes"][0]["target"], hex(y.value, 14));
}

TEST(Cli, SearchIndependentOfWorkers) {
    const auto dir = scratch("workers");
    ASSERT_EQ(rdp_cli(kSmallBuild + " --out " + dir.string()).code, 0);
    const std::string base = "search --format csv --target-count 60 --target-seed 4 --tables " + dir.string();
    const auto a = rdp_cli(base + " --workers 1");
    const auto b = rdp_cli(base + " --workers 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CorruptTableNamesField) {
    const auto dir = scratch("corrupt");
    ASSERT_EQ(rdp_cli(kSmallBuild + " --out " + dir.string()).code, 0);
    const auto path = dir / "table_001.rdpt";
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    bytes[bytes.size() - 20] ^= 1;
    std::ofstream(path, std::ios::binary).write(bytes.data(), std::streamsize(bytes.size()));
    const auto r = rdp_cli("search --target 1 --tables " + dir.string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("[checksum]"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("table_001.rdpt"), std::string::npos) << r.out;

    const auto missing = rdp_cli("search --target 1 --tables " + (dir / "nope").string());
    EXPECT_EQ(missing.code, 2);
}

TEST(Cli, TheoryPointValues) {
    const auto r = rdp_cli("theory --format json");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["success_p"].get<double>(), 0.874, 0.001);
    EXPECT_NEAR(j["expected_T"].get<double>() / 394023, 1.0, 0.01);
    EXPECT_NEAR(j["expected_total_false_alarms"].get<double>() / 505, 1.0, 0.01);
    EXPECT_NEAR(j["m0"].get<double>(), 218812, 1.0);

    const auto coef = rdp_cli("theory --dpc 3 --tables 2 --c 2.04 --format json");
    ASSERT_EQ(coef.code, 0) << coef.out;
    EXPECT_NEAR(nlohmann::json::parse(coef.out)["D_tcr"].get<double>() / 24.9292, 1.0, 0.02);
}

TEST(Cli, OptimizeReportsTableRow) {
    const auto r = rdp_cli("optimize --dpc 3 --p 0.8 --format json");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["result"]["l"], 2);
    EXPECT_NEAR(j["result"]["c"].get<double>(), 2.04, 0.03);
    EXPECT_NEAR(j["result"]["D_tcr"].get<double>() / 24.9292, 1.0, 0.02);
    EXPECT_EQ(j["candidates"].size(), 8u);
}

TEST(Cli, ExperimentWritesReports) {
    const auto dir = scratch("experiment");
    fs::create_directories(dir);
    const auto r = rdp_cli("experiment --n-bits 14 --k-bits 4 --m0 800 --fn prf-test --targets 25 --json " +
                           (dir / "e.json").string() + " --csv " + (dir / "e.csv").string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(std::ifstream(dir / "e.json"));
    EXPECT_EQ(j["schema"], "rdp-experiment-report");
    EXPECT_EQ(j["config"]["n_targets"], 25);
    std::ifstream csv(dir / "e.csv");
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    EXPECT_EQ(line, "target,found,invocations,alarms,false_alarms,iteration_found");
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 25u);
    EXPECT_EQ(rdp_cli("experiment --targets 0").code, 1);
}

TEST(Cli, CompareSubset) {
    const auto r = rdp_cli("compare --methods rainbow rainbow-dp --n-bits 16 --targets 20 --format json");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema"], "rdp-comparison-report");
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["published_coefficients"].size(), 8u);
    EXPECT_EQ(rdp_cli("compare --methods sha1").code, 1);
}
