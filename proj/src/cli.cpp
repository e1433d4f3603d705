#include "speclab/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

namespace speclab {

namespace {

using json = nlohmann::json;
constexpr cplx I{0.0, 1.0};

const std::vector<int> kSpikeGrid{125, 250, 500, 1000, 2000, 4000};
const std::vector<int> kBulkGrid{125, 250, 500, 1000, 2000};
const std::vector<int> kResolventGrid{125, 250, 500, 1000};

Scenario wigner_spike(const std::string& name, CMatrix c, JordanSpec jordan, std::pair<double, double> slope) {
    Scenario s;
    s.name = name;
    s.family = Family::MatrixSpike;
    s.N_grid = kSpikeGrid;
    s.trials = 10;
    s.seed = 1;
    const int n = static_cast<int>(c.rows());
    for (int j = 0; j < n; ++j) {
        s.rows.push_back(j);
        s.cols.push_back(j);
    }
    s.C = std::move(c);
    s.jordan = std::move(jordan);
    s.slope_range = slope;
    return s;
}

Scenario bulk(const std::string& name, int col, cplx c, cplx xi, bool exclude, std::pair<double, double> slope) {
    Scenario s;
    s.name = name;
    s.family = Family::BulkImag;
    s.N_grid = kBulkGrid;
    s.trials = 10;
    s.seed = 1;
    s.rows = {0};
    s.cols = {col};
    s.C = CMatrix::Constant(1, 1, c);
    s.jordan = {{{xi, {1}}}};
    s.exclude_outliers = exclude;
    s.slope_range = slope;
    return s;
}

Scenario resolvent(const std::string& name, bool spiked) {
    Scenario s;
    s.name = name;
    s.family = Family::ResolventError;
    s.N_grid = kResolventGrid;
    s.trials = 10;
    s.seed = 1;
    s.domain = {-1.0, 1.0, 1.0, 8.0};
    s.grid = {cplx(-1.0, 1.0), cplx(1.0, 1.0), cplx(0.0, 2.0), cplx(0.0, 4.0)};
    if (spiked) {
        s.rows = {0};
        s.cols = {0};
        s.C = CMatrix::Constant(1, 1, 8.0 * I);
        s.jordan = {{{8.0 * I, {1}}}};
        s.exclude_radius = 0.3;
        s.grid.push_back(63.0 / 8.0 * I);  // the limit point itself: dropped and reported
    }
    s.slope_range = std::pair{-0.65, -0.35};
    return s;
}

std::vector<ScenarioInfo> build_registry() {
    std::vector<ScenarioInfo> r;
    const CMatrix c3 = [] {
        CMatrix c = 8.0 * I * CMatrix::Identity(3, 3);
        c(0, 1) = 1.0;
        c(1, 2) = 1.0;
        return c;
    }();
    r.push_back({"wigner-spike-c1", "Wigner + 8i e1 e1^T: one outlier at 63i/8, delta(N) ~ N^-1/2",
                 "rank-one spike outlier and its N^-1/2 rate", [] {
                     auto s = wigner_spike("wigner-spike-c1", CMatrix::Constant(1, 1, 8.0 * I), {{{8.0 * I, {1}}}},
                                           {-0.65, -0.35});
                     s.min_frequency = 0.9;
                     return s;
                 }});
    r.push_back({"wigner-spike-c2", "Wigner + diag(8i,8i,8i) on 3 coordinates: three outliers at 63i/8, rate N^-1/2",
                 "semisimple triple spike", [] {
                     return wigner_spike("wigner-spike-c2", 8.0 * I * CMatrix::Identity(3, 3), {{{8.0 * I, {1, 1, 1}}}},
                                         {-0.65, -0.35});
                 }});
    r.push_back({"wigner-spike-c3", "Wigner + 3x3 Jordan block at 8i: three outliers at 63i/8, rate N^-1/6",
                 "Jordan block of size 3 slows the rate to N^-1/(2p)", [c3] {
                     auto s = wigner_spike("wigner-spike-c3", c3, {{{8.0 * I, {3}}}}, {-0.30, -0.05});
                     s.hit_radius = 0.5;  // delta decays like N^-1/6, still about 0.2 at N = 4000
                     return s;
                 }});
    r.push_back({"wigner-spike-c4", "Wigner + 2i e1 e1^T: one outlier at 3i/2, rate N^-1/2",
                 "rank-one spike close to the bulk", [] {
                     auto s = wigner_spike("wigner-spike-c4", CMatrix::Constant(1, 1, 2.0 * I), {{{2.0 * I, {1}}}},
                                           {-0.65, -0.35});
                     s.min_frequency = 0.9;
                     return s;
                 }});
    r.push_back({"bulk-a1", "Wigner + 8i e1 e1^T: max |Im| of the non-outlier eigenvalues, rate N^-1",
                 "bulk eigenvalues return to the real line at N^-1",
                 [] { return bulk("bulk-a1", 0, 8.0 * I, 8.0 * I, true, {-1.25, -0.75}); }});
    r.push_back({"bulk-a5", "Wigner + i e1 e1^T (xi = i on the unit circle): max |Im| of all eigenvalues, rate N^-1/2",
                 "degenerate limit point z0 = 0 on the bulk edge of the window",
                 [] { return bulk("bulk-a5", 0, I, I, false, {-0.75, -0.25}); }});
    r.push_back({"bulk-a6", "Wigner + i e1 e2^T (QP = 0): max |Im| of all eigenvalues, rate N^-1",
                 "nilpotent perturbation leaves the window intact",
                 [] { return bulk("bulk-a6", 1, I, 0.0, false, {-1.25, -0.75}); }});
    r.push_back({"hx-wigner-122", "H X with H = diag(c)+I, c = (-1,-2,-2), Wigner X: outliers at sqrt(2)/2 i and 2 sqrt(3)/3 i (x2)",
                 "product H X as a spiked pencil", [] {
                     Scenario s;
                     s.name = "hx-wigner-122";
                     s.family = Family::HXProduct;
                     s.N_grid = {1000};
                     s.trials = 20;
                     s.seed = 1;
                     s.hx_c = {-1.0, -2.0, -2.0};
                     s.hit_radius = 0.15;
                     s.min_frequency = 0.9;
                     return s;
                 }});
    r.push_back({"hx-mp-square", "H X with c = (-1) and square Marchenko-Pastur X: a real outlier at -1/2",
                 "product H X, sample covariance case", [] {
                     Scenario s;
                     s.name = "hx-mp-square";
                     s.family = Family::HXProduct;
                     s.law = LimitLaw::marchenko_pastur(1.0);
                     s.N_grid = {1000};
                     s.trials = 20;
                     s.seed = 1;
                     s.hx_c = {-1.0};
                     s.hit_radius = 0.1;
                     s.min_frequency = 0.9;
                     return s;
                 }});
    r.push_back({"port-hamiltonian", "diag(i t) - Z, Z square Marchenko-Pastur, t = (1, 2): outliers at -t^2/(1+it)",
                 "dissipative perturbation of a sample covariance matrix", [] {
                     Scenario s;
                     s.name = "port-hamiltonian";
                     s.family = Family::MatrixSpike;
                     s.law = LimitLaw::marchenko_pastur(1.0);
                     s.N_grid = kBulkGrid;
                     s.trials = 10;
                     s.seed = 1;
                     s.ph_t = {1.0, 2.0};
                     s.slope_range = std::pair{-0.65, -0.35};
                     return s;
                 }});
    r.push_back({"quad-acoustic", "Acoustic quadratic X - p(z) I + q(z) e_N e_N^T with Wigner X, zeta = 1: eigenvalues near 0.3223",
                 "random quadratic matrix polynomial", [] {
                     Scenario s;
                     s.name = "quad-acoustic";
                     s.family = Family::Quadratic;
                     s.N_grid = {500};
                     s.trials = 20;
                     s.seed = 1;
                     s.zeta = 1.0;
                     s.target = 0.3223;
                     s.hit_radius = 0.05;
                     s.min_frequency = 0.8;
                     return s;
                 }});
    const std::vector<cplx> poles{0.9, std::polar(0.5, std::numbers::pi / 4.0)};
    r.push_back({"hankel-modes", "Noiseless two-mode signal, Hankel pencil z U0 - U1: poles 0.9 and 0.5 e^{i pi/4}",
                 "damped-exponential recovery from a Hankel pencil", [poles] {
                     Scenario s;
                     s.name = "hankel-modes";
                     s.family = Family::Hankel;
                     s.hankel_task = HankelTask::Recovery;
                     s.N_grid = {8, 16, 32, 64};
                     s.trials = 1;
                     s.seed = 1;
                     s.modes = {{1.0, poles[0]}, {cplx(0.5, 0.5), poles[1]}};
                     s.hit_radius = 1e-8;
                     s.min_frequency = 1.0;
                     return s;
                 }});
    r.push_back({"hankel-conjecture", "Pure-noise Hankel pencils at z = 2: max-norm of the mode block of the resolvent vs n",
                 "conjectured n^-1/2 local law for noise Hankel pencils", [poles] {
                     Scenario s;
                     s.name = "hankel-conjecture";
                     s.family = Family::Hankel;
                     s.hankel_task = HankelTask::NoiseResolvent;
                     s.N_grid = {64, 128, 256, 512};
                     s.trials = 50;
                     s.seed = 7;
                     s.noise_sigma = 1.0;
                     s.z_probe = 2.0;
                     s.poles = poles;
                     s.slope_range = std::pair{-0.7, -0.3};
                     return s;
                 }});
    r.push_back({"resolvent-baseline", "A = 0: sup over a grid of ||(X - z)^-1 - m(z) I||_max, rate N^-1/2",
                 "isotropic local law of the Wigner resolvent", [] { return resolvent("resolvent-baseline", false); }});
    r.push_back({"resolvent-c1", "Wigner + 8i e1 e1^T: sup error of the deformed limit resolvent off a disc at 63i/8",
                 "local law of the deformed resolvent", [] { return resolvent("resolvent-c1", true); }});
    r.push_back({"window-scan-c4", "Deformed window of Wigner + 2i e1 e1^T on [-1,1]x[1,2]: excluded disc at 3i/2, spectrum overlay",
                 "excluded disc of diameter O(N^-beta) around the limit point", [] {
                     Scenario s;
                     s.name = "window-scan-c4";
                     s.family = Family::WindowScan;
                     s.N_grid = {250, 500, 1000, 2000};
                     s.trials = 1;
                     s.seed = 1;
                     s.rows = {0};
                     s.cols = {0};
                     s.C = CMatrix::Constant(1, 1, 2.0 * I);
                     s.jordan = {{{2.0 * I, {1}}}};
                     s.raster = {-1.0, 1.0, 1.0, 2.0};
                     s.resolution = 0.01;
                     s.slope_range = std::pair{-0.55, -0.35};
                     return s;
                 }});
    return r;
}

json opt_number(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

json config_json(const RunConfig& cfg, const Scenario& scn) {
    json c;
    c["scenario"] = scn.name;
    c["n_grid"] = scn.N_grid;
    c["trials"] = scn.trials;
    c["seed"] = scn.seed;
    c["beta"] = scn.beta;
    c["omega"] = scn.omega;
    c["out"] = cfg.out.string();
    c["jobs"] = cfg.jobs;
    c["budget_seconds"] = opt_number(cfg.budget_seconds);
    if (cfg.slope_range) c["slope_range"] = {cfg.slope_range->first, cfg.slope_range->second};
    if (cfg.min_frequency) c["min_frequency"] = *cfg.min_frequency;
    return c;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

void close_out(std::ofstream& f, const std::filesystem::path& p) {
    f.close();
    if (!f) throw std::runtime_error("error while writing " + p.string());
}

void write_csvs(const ExperimentResult& r, const std::filesystem::path& dir) {
    const auto rp = dir / "rates.csv";
    auto rates = open_out(rp);
    rates << "scenario,N,trial,seed,statistic,value\n";
    for (const auto& row : r.rates)
        rates << r.scenario << ',' << row.N << ',' << row.trial << ',' << row.seed << ',' << row.statistic << ','
              << format_double(row.value) << '\n';
    close_out(rates, rp);

    const auto sp = dir / "spectrum.csv";
    auto spec = open_out(sp);
    spec << "scenario,N,trial,seed,re,im\n";
    for (const auto& row : r.spectra)
        spec << r.scenario << ',' << row.N << ',' << row.trial << ',' << row.seed << ',' << format_double(row.value.real())
             << ',' << format_double(row.value.imag()) << '\n';
    close_out(spec, sp);

    const auto ap = dir / "raster.csv";
    auto raster = open_out(ap);
    raster << "scenario,N,x,y,inside\n";
    for (const auto& row : r.raster)
        raster << r.scenario << ',' << row.N << ',' << format_double(row.x) << ',' << format_double(row.y) << ','
               << (row.inside ? 1 : 0) << '\n';
    close_out(raster, ap);
}

json summary_json(const ExperimentResult& r, const Scenario& scn, double elapsed) {
    json s;
    s["scenario"] = r.scenario;
    s["family"] = family_name(scn.family);
    json preds = json::array();
    for (const auto& p : r.predictions)
        preds.push_back({{"z0_re", p.z0.real()},
                         {"z0_im", p.z0.imag()},
                         {"k", p.multiplicity},
                         {"rate", opt_number(p.rate_exponent)},
                         {"degenerate", p.degenerate}});
    s["predictions"] = preds;
    s["statistic"] = r.statistic;
    s["slope"] = opt_number(r.rate.slope);
    s["intercept"] = opt_number(r.rate.intercept);
    s["r2"] = opt_number(r.rate.r_squared);
    json per_n = json::array();
    for (const auto& n : r.rate.per_N)
        per_n.push_back({{"N", n.N}, {"median", n.median}, {"q25", n.q25}, {"q75", n.q75}, {"count", n.count}});
    s["per_N"] = per_n;
    if (r.frequency) {
        s["frequency"] = r.frequency->frequency;
        s["frequency_interval"] = {r.frequency->lower, r.frequency->upper};
        s["successes"] = r.frequency->successes;
        s["total"] = r.frequency->total;
    } else {
        s["frequency"] = nullptr;
    }
    json expected;
    if (scn.slope_range) expected["slope_range"] = {scn.slope_range->first, scn.slope_range->second};
    if (scn.min_frequency) expected["min_frequency"] = *scn.min_frequency;
    s["expected"] = expected.is_null() ? json::object() : expected;
    json dropped = json::array();
    for (const auto& [n, z] : r.dropped) dropped.push_back({{"N", n}, {"re", z.real()}, {"im", z.imag()}});
    s["dropped_grid"] = dropped;
    s["notes"] = r.notes;
    s["complete"] = r.complete;
    s["cells_done"] = r.cells_done;
    s["cells_total"] = r.cells_total;
    s["elapsed_seconds"] = elapsed;
    s["pass"] = r.pass;
    return s;
}

std::vector<int> parse_int_list(const json& j) {
    if (j.is_number_integer()) return {j.get<int>()};
    return j.get<std::vector<int>>();
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() {
    static const std::vector<ScenarioInfo> registry = build_registry();
    return registry;
}

const ScenarioInfo& find_scenario(const std::string& name) {
    for (const auto& s : scenario_registry())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown scenario '" + name + "' (see `speclab list`)");
}

void list_scenarios(std::ostream& os) {
    std::size_t width = 0;
    for (const auto& s : scenario_registry()) width = std::max(width, s.name.size());
    for (const auto& s : scenario_registry())
        os << std::left << std::setw(static_cast<int>(width) + 2) << s.name << s.description << "  [" << s.anchor << "]\n";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    if (j.contains("config")) j = j["config"];
    if (!j.is_object()) throw std::invalid_argument("config " + path.string() + ": expected a JSON object");
    static const std::vector<std::string> known{"scenario", "n_grid", "trials", "seed", "beta", "omega", "out",
                                                "jobs", "budget_seconds", "slope_range", "min_frequency"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw std::invalid_argument("config " + path.string() + ": unknown key '" + k + "'");
    RunConfig cfg;
    try {
        if (j.contains("scenario")) cfg.scenario = j["scenario"].get<std::string>();
        if (j.contains("n_grid")) cfg.n_grid = parse_int_list(j["n_grid"]);
        if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
        if (j.contains("omega")) cfg.omega = j["omega"].get<double>();
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
        if (j.contains("budget_seconds") && !j["budget_seconds"].is_null()) cfg.budget_seconds = j["budget_seconds"].get<double>();
        if (j.contains("slope_range")) {
            const auto r = j["slope_range"].get<std::vector<double>>();
            if (r.size() != 2) throw std::invalid_argument("slope_range needs two numbers");
            cfg.slope_range = std::pair{r[0], r[1]};
        }
        if (j.contains("min_frequency")) cfg.min_frequency = j["min_frequency"].get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return cfg;
}

Scenario resolve(const RunConfig& cfg) {
    Scenario s = find_scenario(cfg.scenario).make();
    if (cfg.n_grid) s.N_grid = *cfg.n_grid;
    if (cfg.trials) s.trials = *cfg.trials;
    if (cfg.seed) {
        s.seed = *cfg.seed;
    } else if (const char* env = std::getenv("SPECTRAL_LAB_SEED"); env && *env) {
        std::uint64_t v = 0;
        const std::string_view sv(env);
        const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
            throw std::invalid_argument("SPECTRAL_LAB_SEED must be an unsigned integer");
        s.seed = v;
    }
    if (cfg.beta) s.beta = *cfg.beta;
    if (cfg.omega) s.omega = *cfg.omega;
    if (cfg.slope_range) s.slope_range = cfg.slope_range;
    if (cfg.min_frequency) s.min_frequency = cfg.min_frequency;
    s.validate();
    return s;
}

int run(const RunConfig& cfg, std::ostream& log) {
    try {
        const Scenario scn = resolve(cfg);
        std::filesystem::create_directories(cfg.out);
        RunOptions opts;
        opts.jobs = cfg.jobs;
        opts.budget_seconds = cfg.budget_seconds;
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentResult r = run_experiment(scn, opts);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;

        write_csvs(r, cfg.out);
        const auto summary = summary_json(r, scn, elapsed.count());
        const auto sp = cfg.out / "summary.json";
        auto sf = open_out(sp);
        sf << summary.dump(2) << '\n';
        close_out(sf, sp);

        json manifest;
        manifest["config"] = config_json(cfg, scn);
        manifest["family"] = family_name(scn.family);
        manifest["versions"] = {{"speclab", kVersion},
                                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                              "." + std::to_string(EIGEN_MINOR_VERSION)},
                                {"compiler", __VERSION__},
                                {"cpp", __cplusplus}};
        const auto mp = cfg.out / "manifest.json";
        auto mf = open_out(mp);
        mf << manifest.dump(2) << '\n';
        close_out(mf, mp);

        log << scn.name << ": " << r.cells_done << '/' << r.cells_total << " cells";
        if (r.rate.slope) log << ", slope " << format_double(*r.rate.slope) << " (R^2 " << format_double(*r.rate.r_squared) << ')';
        if (r.frequency) log << ", frequency " << format_double(r.frequency->frequency);
        log << (r.pass ? ", pass" : ", FAIL") << '\n';
        if (!r.complete) {
            log << "wall-clock budget exceeded; partial results written to " << cfg.out.string() << '\n';
            return kExitBudget;
        }
        return r.pass ? kExitOk : kExitRangeFail;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"speclab: outliers of randomly perturbed matrices and matrix polynomials"};
    app.require_subcommand(1);
    app.add_subcommand("list", "List the built-in scenarios");
    auto* runc = app.add_subcommand("run", "Run a scenario and write CSV/JSON artifacts");
    std::string positional, scenario, config, out_dir;
    std::vector<int> n_grid;
    int trials = 0, jobs = 0;
    std::uint64_t seed = 0;
    double beta = 0.0, omega = 0.0, budget = 0.0;
    runc->add_option("name", positional, "Scenario name");
    runc->add_option("--scenario", scenario, "Scenario name");
    runc->add_option("--config", config, "JSON config or manifest");
    runc->add_option("--n-grid,--N", n_grid, "Comma-separated N values")->delimiter(',');
    runc->add_option("--trials", trials, "Trials per N")->check(CLI::PositiveNumber);
    runc->add_option("--seed", seed, "Root seed (fallback: SPECTRAL_LAB_SEED)");
    runc->add_option("--beta", beta, "Window exponent beta");
    runc->add_option("--omega", omega, "Window parameter omega");
    runc->add_option("--out", out_dir, "Output directory");
    runc->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    runc->add_option("--budget-seconds", budget, "Stop scheduling cells after this many seconds");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }
    if (app.got_subcommand("list")) {
        list_scenarios(out);
        return kExitOk;
    }
    RunConfig cfg;
    try {
        if (!config.empty()) cfg = load_config(config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    if (!positional.empty() && !scenario.empty() && positional != scenario) {
        err << "error: scenario given twice ('" << positional << "' and '" << scenario << "')\n";
        return kExitError;
    }
    if (!positional.empty()) cfg.scenario = positional;
    if (!scenario.empty()) cfg.scenario = scenario;
    if (cfg.scenario.empty()) {
        err << "error: no scenario given (positional name, --scenario or --config)\n";
        return kExitError;
    }
    if (runc->count("--n-grid")) cfg.n_grid = n_grid;
    if (runc->count("--trials")) cfg.trials = trials;
    if (runc->count("--seed")) cfg.seed = seed;
    if (runc->count("--beta")) cfg.beta = beta;
    if (runc->count("--omega")) cfg.omega = omega;
    if (runc->count("--out")) cfg.out = out_dir;
    if (runc->count("--jobs")) cfg.jobs = jobs;
    if (runc->count("--budget-seconds")) cfg.budget_seconds = budget;
    return run(cfg, err);
}

}  // namespace speclab
