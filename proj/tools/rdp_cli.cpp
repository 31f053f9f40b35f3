// rdp: command-line front end for building, searching, modelling and
// benchmarking rainbow distinguished point tables.
//
// Exit codes: 0 success, 1 usage or validation error, 2 data error
// (missing or corrupt table files), 3 runtime error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdp/rdp.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;
constexpr std::uint64_t kDefaultSeed = 0x5eed;
constexpr std::uint64_t kDefaultTargetSeed = 0x7a26e7;

enum class Format { Human, Json, Csv };

const std::map<std::string, Format> kFormats = {{"human", Format::Human}, {"json", Format::Json}, {"csv", Format::Csv}};

std::string to_hex(std::uint64_t v, int n_bits) {
    const int width = (n_bits + 3) / 4;
    std::ostringstream os;
    os << std::hex << std::setw(width) << std::setfill('0') << v;
    return os.str();
}

std::uint64_t parse_hex(const std::string& s, int n_bits) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
        throw rdp::ConfigError("target '" + s + "' is not a hexadecimal number");
    }
    if (used != s.size()) throw rdp::ConfigError("target '" + s + "' is not a hexadecimal number");
    if (v >> n_bits) throw rdp::ConfigError("target '" + s + "' is outside [0, N)");
    return v;
}

int log2_exact(std::uint64_t t) {
    if (t == 0 || (t & (t - 1)) != 0) throw rdp::ConfigError("--t must be a power of two, got " + std::to_string(t));
    return std::countr_zero(t);
}

/// Emits a flat record in the selected format.
void emit_flat(Format fmt, const json& obj, std::ostream& os = std::cout) {
    switch (fmt) {
    case Format::Json: os << obj.dump(2) << '\n'; break;
    case Format::Csv: {
        bool first = true;
        for (const auto& [k, v] : obj.items()) os << (std::exchange(first, false) ? "" : ",") << k;
        os << '\n';
        first = true;
        for (const auto& [k, v] : obj.items()) os << (std::exchange(first, false) ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump());
        os << '\n';
        break;
    }
    case Format::Human:
        for (const auto& [k, v] : obj.items()) os << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        break;
    }
}

/// Emits rows sharing the same keys.
void emit_rows(Format fmt, const json& rows, std::ostream& os = std::cout) {
    if (fmt == Format::Json) {
        os << rows.dump(2) << '\n';
        return;
    }
    if (rows.empty()) return;
    const char* sep = fmt == Format::Csv ? "," : "  ";
    bool first = true;
    for (const auto& [k, v] : rows.front().items()) os << (std::exchange(first, false) ? "" : sep) << k;
    os << '\n';
    for (const auto& row : rows) {
        first = true;
        for (const auto& [k, v] : row.items())
            os << (std::exchange(first, false) ? "" : sep) << (v.is_string() ? v.get<std::string>() : v.dump());
        os << '\n';
    }
}

// ---- shared table-parameter flags ------------------------------------------

struct SpaceFlags {
    int n_bits = 24;
    std::optional<int> k_bits;
    std::optional<std::uint64_t> t;
    double c = 1.8;
    std::uint32_t tables = 1;
    std::uint64_t m0 = 262144;
    std::uint64_t seed = kDefaultSeed;
    std::string fn = "md5-trunc";

    void add(CLI::App* app, bool with_seed_and_fn) {
        app->add_option("--n-bits", n_bits, "search space width, N = 2^n-bits")->capture_default_str();
        auto* k = app->add_option("--k-bits", k_bits, "distinguished point width, t = 2^k-bits (default 9)");
        auto* tt = app->add_option("--t", t, "chain length t (a power of two)");
        k->excludes(tt);
        app->add_option("--c", c, "chain length bound ratio, t_hat = round(c t)")->capture_default_str();
        app->add_option("--tables", tables, "number of tables l")->capture_default_str();
        app->add_option("--m0", m0, "starting points per table")->capture_default_str();
        if (with_seed_and_fn) {
            app->add_option("--seed", seed, "root seed")->capture_default_str();
            app->add_option("--fn", fn, "one-way function: md5-trunc | prf-test")->capture_default_str();
        }
    }

    rdp::SpaceParams params() const {
        int kb = 9;
        if (k_bits) kb = *k_bits;
        if (t) kb = log2_exact(*t);
        auto p = rdp::SpaceParams::make(n_bits, kb, c, tables, m0, seed, fn);
        (void)rdp::function_kind(p.function_id);
        return p;
    }
};

json params_json(const rdp::SpaceParams& p) { return rdp::experiment::to_json(p); }

std::vector<rdp::PrecompTable> load_table_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw rdp::LoadError("path", "table directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".rdpt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw rdp::LoadError("path", "no .rdpt files in '" + dir + "'");
    std::vector<rdp::PrecompTable> tables;
    for (const auto& f : files) {
        try {
            tables.push_back(rdp::storage::load(f));
        } catch (const rdp::LoadError& e) {
            throw rdp::LoadError(e.field(), f.filename().string() + ": " + e.detail());
        }
    }
    return tables;
}

// ---- subcommands -----------------------------------------------------------

struct BuildCmd {
    SpaceFlags space;
    std::string out;
    std::string scheme = "mixed";
    unsigned workers = 1;
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("build", "precompute l tables and write one RDPT file per table");
        space.add(app, true);
        app->add_option("--out", out, "output directory")->required();
        app->add_option("--start-points", scheme, "mixed | sequential")->check(CLI::IsMember({"mixed", "sequential"}));
        app->add_option("--workers", workers, "worker threads (0 = all cores)");
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        const auto params = space.params();
        rdp::BuildOptions opt;
        opt.workers = workers;
        opt.scheme = scheme == "sequential" ? rdp::StartPointScheme::Sequential : rdp::StartPointScheme::SeededMix;
        const auto tables = rdp::build_tables(params, opt);

        fs::create_directories(out);
        json files = json::array();
        std::uint64_t invocations = 0, chains = 0;
        for (const auto& t : tables) {
            char name[32];
            std::snprintf(name, sizeof name, "table_%03u.rdpt", t.table_index);
            rdp::storage::save(t, fs::path(out) / name);
            files.push_back(name);
            invocations += t.precomp_invocations;
            chains += t.m0();
        }
        json summary = {{"params", params_json(params)},
                        {"files", files},
                        {"chains_stored", chains},
                        {"precomp_invocations", invocations},
                        {"precomp_coefficient", double(invocations) / double(params.N())}};
        std::ofstream(fs::path(out) / "build_summary.json") << summary.dump(2) << '\n';
        emit_flat(kFormats.at(format), {{"out", out},
                                        {"tables", tables.size()},
                                        {"chains_stored", chains},
                                        {"precomp_invocations", invocations},
                                        {"precomp_coefficient", double(invocations) / double(params.N())}});
    }
};

struct SearchCmd {
    std::string dir;
    std::vector<std::string> targets;
    std::optional<std::size_t> target_count;
    std::uint64_t target_seed = kDefaultTargetSeed;
    bool early_break = false;
    unsigned workers = 1;
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("search", "search f-images against a directory of tables");
        app->add_option("--tables", dir, "directory holding .rdpt files")->required();
        auto* tg = app->add_option("--target", targets, "target y* in hex (repeatable)");
        auto* tc = app->add_option("--target-count", target_count, "search K f-images of uniform points");
        tg->excludes(tc);
        app->add_option("--target-seed", target_seed, "seed for --target-count")->needs(tc);
        app->add_flag("--early-break", early_break, "stop each online chain at its first distinguished point");
        app->add_option("--workers", workers, "worker threads (0 = all cores)");
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        if (targets.empty() && !target_count) throw rdp::ConfigError("one of --target or --target-count is required");
        const auto tables = load_table_dir(dir);
        const auto& p = tables.front().params;
        std::vector<rdp::Point> ys;
        if (target_count) {
            ys = rdp::experiment::make_targets(*target_count, target_seed, p.function_id, p.n_bits);
        } else {
            for (const auto& s : targets) ys.push_back(rdp::Point{parse_hex(s, p.n_bits)});
        }
        const rdp::OnlineSearcher searcher(tables, {early_break, false});
        const auto batch = rdp::batch_search(ys, searcher, workers);

        json rows = json::array();
        for (std::size_t k = 0; k < ys.size(); ++k) {
            const auto& o = batch.outcomes[k];
            rows.push_back({{"target", to_hex(ys[k].value, p.n_bits)},
                            {"found", o.found ? to_hex(o.found->value, p.n_bits) : std::string("-")},
                            {"invocations", o.counters.f_invocations},
                            {"alarms", o.counters.alarms},
                            {"false_alarms", o.counters.false_alarms},
                            {"iterations", o.counters.iterations_executed}});
        }
        const Format fmt = kFormats.at(format);
        const json stats = {{"targets", batch.stats.n_targets},
                            {"found", batch.stats.found},
                            {"success_rate", batch.stats.success_rate},
                            {"mean_invocations", batch.stats.mean_invocations},
                            {"mean_false_alarms", batch.stats.mean_false_alarms}};
        if (fmt == Format::Json) {
            std::cout << json{{"outcomes", rows}, {"summary", stats}}.dump(2) << '\n';
        } else {
            emit_rows(fmt, rows);
            if (fmt == Format::Human) emit_flat(fmt, stats);
        }
    }
};

struct TheoryCmd {
    SpaceFlags space;
    std::optional<double> dpc;
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("theory", "analytic predictions for a configuration");
        space.add(app, false);
        auto* d = app->add_option("--dpc", dpc, "coefficient form: precomputation coefficient D_pc (no absolute scale)");
        d->excludes("--m0")->excludes("--n-bits")->excludes("--k-bits")->excludes("--t");
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        rdp::theory::TheoryInputs in;
        if (dpc) {
            if (!(*dpc > 0.0)) throw rdp::ConfigError("--dpc must be positive");
            if (!(space.c > 0.0) || space.tables < 1) throw rdp::ConfigError("--c must be positive and --tables >= 1");
            in = rdp::theory::TheoryInputs::from_coefficients(space.tables, space.c, *dpc);
        } else {
            in = rdp::theory::TheoryInputs::from_params(space.params());
        }
        const auto r = rdp::theory::make_report(in);
        json obj = {{"l", in.l}, {"c", in.c}, {"m0_tilde_ratio", in.m0_tilde_ratio}, {"H", r.H},
                    {"D_pc", r.D_pc}, {"success_p", r.success_p}, {"D_tcr", r.D_tcr}};
        auto opt = [&](const char* key, const std::optional<double>& v) { obj[key] = v ? json(*v) : json(nullptr); };
        opt("m0", r.m0);
        opt("M", r.M);
        opt("precomp_invocations", r.precomp_invocations);
        opt("expected_T", r.expected_T);
        opt("expected_total_false_alarms", r.expected_total_false_alarms);
        opt("D_tcr_from_T", r.D_tcr_from_T);
        emit_flat(kFormats.at(format), obj);
    }
};

struct OptimizeCmd {
    double dpc = 0.0;
    double p = 0.0;
    std::uint32_t l_max = 8;
    std::string weight = "stored";
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("optimize", "minimize D_tcr over (l, c) for a budget and target success");
        app->add_option("--dpc", dpc, "precomputation coefficient D_pc")->required();
        app->add_option("--p", p, "target success probability")->required();
        app->add_option("--l-max", l_max, "largest table count tried")->capture_default_str();
        app->add_option("--weight", weight, "false-alarm weighting: stored (published) | starting")
            ->check(CLI::IsMember({"stored", "starting"}));
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        if (!(dpc > 0.0)) throw rdp::ConfigError("--dpc must be positive");
        if (!(p > 0.0 && p < 1.0)) throw rdp::ConfigError("--p must be in (0, 1)");
        if (l_max < 1) throw rdp::ConfigError("--l-max must be >= 1");
        const auto w = weight == "stored" ? rdp::theory::FalseAlarmWeight::StoredChains
                                          : rdp::theory::FalseAlarmWeight::StartingPoints;
        const auto res = rdp::optimizer::optimize(dpc, p, l_max, w);
        json cands = json::array();
        for (const auto& c : res.candidates)
            cands.push_back({{"l", c.l}, {"c", c.c}, {"achieved_p", c.achieved_p}, {"D_tcr", c.D_tcr}});
        const json best = {{"feasible", res.feasible}, {"l", res.l},         {"c", res.c},
                           {"achieved_p", res.achieved_p}, {"D_pc", res.D_pc}, {"D_tcr", res.D_tcr}};
        const Format fmt = kFormats.at(format);
        if (fmt == Format::Json) {
            std::cout << json{{"result", best}, {"candidates", cands}}.dump(2) << '\n';
        } else {
            emit_flat(fmt, best);
            if (fmt == Format::Human) std::cout << '\n';
            emit_rows(fmt, cands);
        }
    }
};

struct ExperimentCmd {
    SpaceFlags space;
    bool reference_config = false;
    std::size_t n_targets = 3000;
    std::uint64_t target_seed = kDefaultTargetSeed;
    bool early_break = false;
    std::string scheme = "mixed";
    unsigned workers = 1;
    std::string json_path;
    std::string csv_path;
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("experiment", "build, search and compare measurements with the model");
        space.add(app, true);
        app->add_flag("--reference-config", reference_config,
                      "N=2^24, m0=262144, t=512, l=1, c=1.8, md5-trunc");
        app->add_option("--targets", n_targets, "number of targets")->capture_default_str();
        app->add_option("--target-seed", target_seed)->capture_default_str();
        app->add_flag("--early-break", early_break, "stop each online chain at its first distinguished point");
        app->add_option("--start-points", scheme, "mixed | sequential")->check(CLI::IsMember({"mixed", "sequential"}));
        app->add_option("--workers", workers, "worker threads (0 = all cores)");
        app->add_option("--json", json_path, "write the summary document here");
        app->add_option("--csv", csv_path, "write per-target rows here");
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        if (reference_config) {
            space = SpaceFlags{};
            space.n_bits = 24;
            space.t = 512;
            space.c = 1.8;
            space.tables = 1;
            space.m0 = 262144;
            space.fn = "md5-trunc";
        }
        const auto params = space.params();
        if (n_targets < 1) throw rdp::ConfigError("--targets must be at least 1");
        rdp::experiment::ExperimentOptions opt;
        opt.workers = workers;
        opt.scheme = scheme == "sequential" ? rdp::StartPointScheme::Sequential : rdp::StartPointScheme::SeededMix;
        opt.search.break_at_first_dp = early_break;
        opt.keep_per_target = !csv_path.empty();
        const auto rep = rdp::experiment::run_experiment(params, n_targets, target_seed, opt);
        const json doc = rdp::experiment::to_json(rep);
        if (!json_path.empty()) std::ofstream(json_path) << doc.dump(2) << '\n';
        if (!csv_path.empty()) {
            std::ofstream csv(csv_path);
            rdp::experiment::write_target_csv(csv, rep.per_target);
        }

        const Format fmt = kFormats.at(format);
        if (fmt == Format::Json) {
            std::cout << doc.dump(2) << '\n';
            return;
        }
        json rows = json::array();
        for (const char* key : {"precomp_invocations", "chains_stored", "success_rate", "mean_online_invocations",
                                "mean_false_alarms"})
            rows.push_back({{"quantity", key},
                            {"measured", doc["measured"][key]},
                            {"predicted", doc["predicted"][key]},
                            {"relative_delta", doc["relative_deltas"][key]}});
        emit_rows(fmt, rows);
    }
};

struct CompareCmd {
    std::vector<std::string> methods = {"rainbow-dp", "rainbow", "hellman", "hellman-dp"};
    int n_bits = 20;
    std::size_t n_targets = 500;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t target_seed = kDefaultTargetSeed;
    std::string fn = "prf-test";
    double d_pc = 3.0;
    double rainbow_coverage = 0.8;
    unsigned workers = 1;
    std::string format = "human";

    void add(CLI::App& root) {
        auto* app = root.add_subcommand("compare", "matched-memory comparison against classic tradeoffs");
        app->add_option("--methods", methods, "subset of rainbow-dp,rainbow,hellman,hellman-dp")->delimiter(',');
        app->add_option("--n-bits", n_bits)->capture_default_str();
        app->add_option("--targets", n_targets)->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--target-seed", target_seed)->capture_default_str();
        app->add_option("--fn", fn)->capture_default_str();
        app->add_option("--dpc", d_pc, "rainbow-dp precomputation coefficient; sets the shared memory")->capture_default_str();
        app->add_option("--rainbow-coverage", rainbow_coverage, "model coverage of the rainbow table")
            ->capture_default_str();
        app->add_option("--workers", workers, "worker threads (0 = all cores)");
        app->add_option("--format", format)->check(CLI::IsMember({"human", "json", "csv"}));
        app->callback([this] { run(); });
    }

    void run() {
        if (n_bits < 12 || n_bits > 30) throw rdp::ConfigError("--n-bits must be in [12, 30] for the desk comparison");
        std::vector<rdp::Method> wanted;
        for (const auto& m : methods) wanted.push_back(rdp::parse_method(m));
        std::vector<rdp::experiment::MethodSpec> specs;
        for (const auto& s : rdp::experiment::desk_comparison_specs(n_bits, seed, fn, d_pc, rainbow_coverage))
            if (std::find(wanted.begin(), wanted.end(), s.method) != wanted.end()) specs.push_back(s);
        const auto rep = rdp::experiment::compare_methods(specs, n_targets, target_seed, workers);
        const json doc = rdp::experiment::to_json(rep);
        const Format fmt = kFormats.at(format);
        if (fmt == Format::Json) {
            std::cout << doc.dump(2) << '\n';
            return;
        }
        emit_rows(fmt, doc["rows"]);
        if (fmt == Format::Human) std::cout << "\npublished optimal coefficients (TM^2 = D_tcr N^2):\n";
        else std::cout << '\n';
        emit_rows(fmt, doc["published_coefficients"]);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rainbow distinguished point time-memory tradeoff toolkit"};
    app.require_subcommand(1);
    BuildCmd build;
    SearchCmd search;
    TheoryCmd theory;
    OptimizeCmd optimize;
    ExperimentCmd experiment;
    CompareCmd compare;
    build.add(app);
    search.add(app);
    theory.add(app);
    optimize.add(app);
    experiment.add(app);
    compare.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    } catch (const rdp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const rdp::ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const rdp::LoadError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
