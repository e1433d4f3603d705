#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "speclab/cli.hpp"

using namespace speclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("speclab_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    return line;
}

RunConfig small(const std::string& scenario, const fs::path& out) {
    RunConfig c;
    c.scenario = scenario;
    c.n_grid = std::vector<int>{40, 80};
    c.trials = 2;
    c.out = out;
    // Tiny grids say nothing about rates; only the plumbing is under test.
    c.slope_range = std::pair{-100.0, 100.0};
    if (find_scenario(scenario).make().min_frequency) c.min_frequency = 0.0;
    return c;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "speclab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("registry") {
    const auto& reg = scenario_registry();
    CHECK(reg.size() >= 12);
    std::set<std::string> names;
    for (const auto& s : reg) {
        names.insert(s.name);
        CHECK_FALSE(s.description.empty());
        CHECK_FALSE(s.anchor.empty());
        const Scenario scn = s.make();
        CHECK(scn.name == s.name);
        CHECK_NOTHROW(scn.validate());
        RunConfig c;
        c.scenario = s.name;
        CHECK_NOTHROW(resolve(c));
    }
    CHECK(names.size() == reg.size());
    for (const char* n : {"wigner-spike-c1", "wigner-spike-c2", "wigner-spike-c3", "wigner-spike-c4", "bulk-a1", "bulk-a5",
                          "bulk-a6", "hx-wigner-122", "hx-mp-square", "port-hamiltonian", "quad-acoustic", "hankel-modes",
                          "hankel-conjecture", "resolvent-baseline", "window-scan-c4"})
        CHECK(names.count(n) == 1);
    CHECK_THROWS_AS(find_scenario("no-such-thing"), std::invalid_argument);

    std::ostringstream os;
    list_scenarios(os);
    int lines = 0;
    for (char ch : os.str()) lines += ch == '\n';
    CHECK(lines == static_cast<int>(reg.size()));
}

TEST_CASE("shortest round-trip doubles") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(0.0) == "0");
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::pow(10.0, u(gen)) * (i % 2 ? 1.0 : -1.0);
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("seed resolution") {
    RunConfig c;
    c.scenario = "wigner-spike-c1";
    ::unsetenv("SPECTRAL_LAB_SEED");
    const auto default_seed = resolve(c).seed;
    ::setenv("SPECTRAL_LAB_SEED", "987", 1);
    CHECK(resolve(c).seed == 987);
    c.seed = 5;
    CHECK(resolve(c).seed == 5);
    c.seed.reset();
    ::setenv("SPECTRAL_LAB_SEED", "12x", 1);
    CHECK_THROWS_AS(resolve(c), std::invalid_argument);
    ::unsetenv("SPECTRAL_LAB_SEED");
    CHECK(resolve(c).seed == default_seed);

    c.n_grid = std::vector<int>{300, 200};
    CHECK_THROWS_AS(resolve(c), std::invalid_argument);
}

TEST_CASE("run writes the documented artifacts") {
    const auto dir = scratch("c1");
    std::ostringstream log;
    REQUIRE(run(small("wigner-spike-c1", dir), log) == kExitOk);
    CHECK(first_line(dir / "rates.csv") == "scenario,N,trial,seed,statistic,value");
    CHECK(first_line(dir / "spectrum.csv") == "scenario,N,trial,seed,re,im");
    CHECK(first_line(dir / "raster.csv") == "scenario,N,x,y,inside");
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const char* key : {"scenario", "predictions", "slope", "r2", "frequency", "pass"}) CHECK(summary.contains(key));
    CHECK(summary["scenario"] == "wigner-spike-c1");
    REQUIRE(summary["predictions"].size() == 1);
    const auto& p = summary["predictions"][0];
    CHECK(p["z0_re"].get<double>() == 0.0);
    CHECK(p["z0_im"].get<double>() == 63.0 / 8.0);
    CHECK(p["k"] == 1);
    CHECK(p["rate"].get<double>() == -0.5);
    CHECK(summary["slope"].is_number());

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["config"]["scenario"] == "wigner-spike-c1");
    CHECK(manifest["config"]["n_grid"] == std::vector<int>{40, 80});
    CHECK(manifest["versions"].contains("speclab"));

    // Every rates row carries the scenario, a seed and a statistic from the cell.
    std::ifstream f(dir / "rates.csv");
    std::string line;
    std::getline(f, line);
    int rows = 0;
    while (std::getline(f, line)) {
        ++rows;
        CHECK(line.rfind("wigner-spike-c1,", 0) == 0);
    }
    CHECK(rows == 4 * 4);  // delta, krylov_dim, nearest_re, nearest_im
}

TEST_CASE("manifest round trip is byte-identical at any job count") {
    for (const char* name : {"wigner-spike-c2", "bulk-a1", "hankel-conjecture"}) {
        const auto a = scratch(std::string(name) + "_a");
        const auto b = scratch(std::string(name) + "_b");
        std::ostringstream log;
        auto cfg = small(name, a);
        if (std::string(name) == "hankel-conjecture") cfg.n_grid = std::vector<int>{16, 32};
        REQUIRE_MESSAGE(run(cfg, log) == kExitOk, log.str());
        const auto again = load_config(a / "manifest.json");
        CHECK(again.scenario == name);
        auto cfg2 = again;
        cfg2.out = b;
        cfg2.jobs = 3;
        REQUIRE(run(cfg2, log) == kExitOk);
        for (const char* f : {"rates.csv", "spectrum.csv", "raster.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("exit codes") {
    std::ostringstream log;
    SUBCASE("range failure") {
        auto cfg = small("wigner-spike-c4", scratch("fail"));
        cfg.slope_range = std::pair{5.0, 6.0};
        CHECK(run(cfg, log) == kExitRangeFail);
        const auto summary = nlohmann::json::parse(slurp(cfg.out / "summary.json"));
        CHECK(summary["pass"] == false);
        cfg.slope_range.reset();
        cfg.min_frequency = 1.5;
        CHECK(run(cfg, log) == kExitRangeFail);
    }
    SUBCASE("unknown scenario") {
        RunConfig cfg;
        cfg.scenario = "wigner-spike-c9";
        cfg.out = scratch("unknown");
        CHECK(run(cfg, log) == kExitError);
        CHECK(log.str().find("unknown scenario") != std::string::npos);
    }
    SUBCASE("unwritable output") {
        const auto file = scratch("blocker");
        fs::create_directories(file.parent_path());
        std::ofstream(file) << "x";
        CHECK(run(small("wigner-spike-c1", file / "sub"), log) == kExitError);
    }
    SUBCASE("budget exceeded flushes partial results") {
        auto cfg = small("wigner-spike-c1", scratch("budget"));
        cfg.budget_seconds = 0.0;
        CHECK(run(cfg, log) == kExitBudget);
        CHECK(fs::exists(cfg.out / "rates.csv"));
        const auto summary = nlohmann::json::parse(slurp(cfg.out / "summary.json"));
        CHECK(summary["complete"] == false);
    }
    SUBCASE("every registry scenario can be forced to fail its range") {
        for (const auto& s : scenario_registry()) {
            const Scenario scn = s.make();
            if (!scn.slope_range && !scn.min_frequency) continue;
            RunConfig cfg;
            cfg.scenario = s.name;
            cfg.out = scratch("force_" + s.name);
            cfg.trials = 1;
            cfg.n_grid = scn.family == Family::Hankel ? std::vector<int>{8, 16} : std::vector<int>{30, 60};
            if (scn.family == Family::WindowScan) cfg.n_grid = std::vector<int>{250, 500};
            cfg.slope_range = std::pair{10.0, 11.0};
            cfg.min_frequency = 2.0;
            CHECK_MESSAGE(run(cfg, log) == kExitRangeFail, s.name);
        }
    }
}

TEST_CASE("config files") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"scenario": "hankel-modes", "n_grid": 8, "trials": 1, "seed": 3, "out": "x"})";
    const auto c = load_config(dir / "c.json");
    CHECK(c.scenario == "hankel-modes");
    CHECK(*c.n_grid == std::vector<int>{8});
    CHECK(*c.seed == 3);
    std::ofstream(dir / "bad.json") << R"({"scenario": "hankel-modes", "colour": 3})";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), std::invalid_argument);
    std::ofstream(dir / "broken.json") << "{";
    CHECK_THROWS_AS(load_config(dir / "broken.json"), std::invalid_argument);
    CHECK_THROWS(load_config(dir / "missing.json"));
}

TEST_CASE("command line") {
    std::string text;
    CHECK(cli({"list"}, &text) == kExitOk);
    CHECK(text.find("window-scan-c4") != std::string::npos);
    CHECK(cli({}) == kExitError);
    CHECK(cli({"run"}) == kExitError);
    CHECK(cli({"run", "bogus-scenario"}) == kExitError);

    const auto dir = scratch("cmd");
    CHECK(cli({"run", "hankel-modes", "--N", "8,16", "--trials", "1", "--out", dir.string()}) == kExitOk);
    const auto m = load_config(dir / "manifest.json");
    CHECK(*m.n_grid == std::vector<int>{8, 16});

    // Flags override the config file.
    const auto dir2 = scratch("cmd2");
    CHECK(cli({"run", "--config", (dir / "manifest.json").string(), "--trials", "2", "--out", dir2.string()}) == kExitOk);
    CHECK(*load_config(dir2 / "manifest.json").trials == 2);
    CHECK(cli({"run", "hankel-modes", "--scenario", "bulk-a1"}) == kExitError);
    CHECK(cli({"run", "hankel-modes", "--trials", "0"}) == kExitError);
}
