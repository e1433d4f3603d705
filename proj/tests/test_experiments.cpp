#include <cmath>
#include <numbers>
#include <queue>
#include <set>

#include "doctest.h"
#include "speclab/ensembles.hpp"
#include "speclab/experiments.hpp"
#include "speclab/polyeig.hpp"

using namespace speclab;

namespace {

const cplx I{0.0, 1.0};

Scenario spike(const std::string& name, int n, std::vector<int> grid, int trials) {
    Scenario s;
    s.name = name;
    s.family = Family::MatrixSpike;
    s.N_grid = std::move(grid);
    s.trials = trials;
    s.seed = 11;
    for (int j = 0; j < n; ++j) {
        s.rows.push_back(j);
        s.cols.push_back(j);
    }
    s.C = 8.0 * I * CMatrix::Identity(n, n);
    s.jordan = {{{8.0 * I, std::vector<int>(n, 1)}}};
    return s;
}

std::vector<double> stat(const ExperimentResult& r, const std::string& name) {
    std::vector<double> v;
    for (const auto& row : r.rates)
        if (row.statistic == name) v.push_back(row.value);
    return v;
}

bool same_tables(const ExperimentResult& a, const ExperimentResult& b) {
    if (a.rates.size() != b.rates.size() || a.spectra.size() != b.spectra.size()) return false;
    for (std::size_t i = 0; i < a.rates.size(); ++i) {
        const auto &x = a.rates[i], &y = b.rates[i];
        if (x.N != y.N || x.trial != y.trial || x.seed != y.seed || x.statistic != y.statistic || x.value != y.value) return false;
    }
    for (std::size_t i = 0; i < a.spectra.size(); ++i)
        if (a.spectra[i].value != b.spectra[i].value || a.spectra[i].seed != b.spectra[i].seed) return false;
    return true;
}

}  // namespace

TEST_CASE("scenario validation") {
    auto s = spike("v", 1, {100, 200}, 2);
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.N_grid = {200, 100};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.N_grid = {100, 100};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.rows.clear();
    bad.cols.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.route = SpikeRoute::Krylov;
    bad.count_radius = 0.3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.jordan = {{{8.0 * I, {2}}}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.family = Family::Quadratic;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // no target
}

TEST_CASE("cell seeds depend only on (name, N, trial)") {
    const auto s = spike("seeds", 1, {100, 200}, 3);
    std::set<std::uint64_t> seen;
    for (int n : s.N_grid)
        for (int t = 0; t < s.trials; ++t) {
            CHECK(cell_seed(s, n, t) == cell_seed(s, n, t));
            seen.insert(cell_seed(s, n, t));
        }
    CHECK(seen.size() == 6);
    auto renamed = s;
    renamed.name = "other";
    CHECK(cell_seed(renamed, 100, 0) != cell_seed(s, 100, 0));
}

TEST_CASE("tables are bit-identical across parallelism degrees") {
    const auto s = spike("det", 3, {60, 120}, 3);
    RunOptions one, three;
    three.jobs = 3;
    const auto a = run_experiment(s, one);
    const auto b = run_experiment(s, three);
    const auto c = run_experiment(s, three);
    CHECK(same_tables(a, b));
    CHECK(same_tables(b, c));
    CHECK(*a.rate.slope == *b.rate.slope);
    REQUIRE(a.rates.size() > 0);
    CHECK(a.rates.front().N == 60);
    CHECK(a.rates.back().N == 120);
    CHECK(a.rates.back().trial == 2);
}

TEST_CASE("singleton grid gives a degenerate fit but a full raw table") {
    const auto r = run_outlier_convergence(spike("single", 1, {150}, 1));
    CHECK_FALSE(r.rate.slope);
    REQUIRE(r.rate.per_N.size() == 1);
    CHECK(r.rate.per_N[0].count == 1);
    CHECK(stat(r, "delta").size() == 1);
    CHECK(r.complete);
    CHECK(r.pass);  // nothing expected

    auto fail = spike("single", 1, {150}, 1);
    fail.slope_range = std::pair{-0.6, -0.4};
    CHECK_FALSE(run_experiment(fail).pass);  // an absent slope cannot be in range
}

TEST_CASE("delta uses the first k eigenvalues by distance") {
    auto dense = spike("sel", 3, {150}, 2);
    dense.route = SpikeRoute::Dense;
    const auto r = run_experiment(dense);
    const auto deltas = stat(r, "delta");
    REQUIRE(deltas.size() == 2);
    for (int t = 0; t < 2; ++t) {
        std::vector<cplx> spec;
        for (const auto& row : r.spectra)
            if (row.trial == t) spec.push_back(row.value);
        REQUIRE(spec.size() == 150);
        const cplx z0 = 63.0 / 8.0 * I;
        const auto ordered = order_by_distance(spec, z0);
        const double expect = std::max({std::abs(ordered[0] - z0), std::abs(ordered[1] - z0), std::abs(ordered[2] - z0)});
        CHECK(deltas[t] == expect);
    }

    // The Krylov route lands on the same eigenvalues.
    auto krylov = dense;
    krylov.route = SpikeRoute::Krylov;
    const auto k = stat(run_experiment(krylov), "delta");
    for (int t = 0; t < 2; ++t) CHECK(k[t] == doctest::Approx(deltas[t]).epsilon(1e-7));
}

TEST_CASE("counting near the limit point") {
    auto s = spike("count", 3, {400}, 4);
    s.count_radius = 0.3;
    const auto r = run_experiment(s);
    const auto counts = stat(r, "count_near");
    REQUIRE(counts.size() == 4);
    REQUIRE(r.frequency);
    CHECK(r.frequency->total == 4);
    int exact = 0;
    for (double c : counts) exact += c == 3.0;
    CHECK(r.frequency->successes == exact);
    CHECK(r.spectra.size() == 4 * 400);
}

TEST_CASE("missing predictions are errors") {
    auto s = spike("none", 1, {100}, 1);
    s.C = CMatrix::Constant(1, 1, 0.5 * I);  // |xi| < 1: no outlier
    s.jordan = {{{0.5 * I, {1}}}};
    CHECK_THROWS_AS(run_experiment(s), std::invalid_argument);
    CHECK_THROWS_AS(run_bulk_imag(spike("x", 1, {100}, 1)), std::invalid_argument);
}

TEST_CASE("bulk imaginary parts") {
    Scenario s;
    s.name = "bulk";
    s.family = Family::BulkImag;
    s.N_grid = {100, 200};
    s.trials = 2;
    s.rows = {0};
    s.cols = {0};
    s.C = CMatrix::Constant(1, 1, 8.0 * I);
    s.jordan = {{{8.0 * I, {1}}}};
    s.exclude_outliers = true;
    const auto excl = run_bulk_imag(s);
    for (double d : stat(excl, "Delta")) CHECK(d < 0.5);
    s.exclude_outliers = false;
    const auto all = run_bulk_imag(s);
    for (double d : stat(all, "Delta")) CHECK(d > 7.0);

    // Nilpotent perturbation: no limit point, still a valid sweep on the dense route.
    s.cols = {1};
    s.C = CMatrix::Constant(1, 1, I);
    s.jordan = {{{0.0, {1}}}};
    const auto nil = run_bulk_imag(s);
    CHECK(nil.predictions.empty());
    for (double d : stat(nil, "Delta")) CHECK(d < 0.5);
    REQUIRE(nil.rate.slope);
}

TEST_CASE("symmetric resolvent matches a direct inverse") {
    const Eigen::MatrixXd x = sample_wigner_real({EnsembleKind::WignerReal, 60, 1, 3});
    const SymmetricResolvent r(x);
    for (cplx z : {cplx(0.3, 1.0), cplx(-1.5, 0.2), cplx(0.0, 7.0)}) {
        const CMatrix direct = (x.cast<cplx>() - z * CMatrix::Identity(60, 60)).inverse();
        CHECK((r(z) - direct).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("resolvent sweeps drop and report points outside the window") {
    Scenario s;
    s.name = "res";
    s.family = Family::ResolventError;
    s.N_grid = {50, 100};
    s.trials = 2;
    s.rows = {0};
    s.cols = {0};
    s.C = CMatrix::Constant(1, 1, 8.0 * I);
    s.jordan = {{{8.0 * I, {1}}}};
    s.domain = {-1.0, 1.0, 1.0, 8.0};
    const cplx z0 = 63.0 / 8.0 * I;
    const auto r = run_resolvent_error(s, {cplx(0.0, 1.0), cplx(0.5, 2.0), z0});
    int at_z0 = 0;
    for (const auto& [n, z] : r.dropped) at_z0 += z == z0;
    CHECK(at_z0 == 2);
    CHECK(stat(r, "sup_error").size() == 4);
    CHECK_THROWS_AS(run_resolvent_error(s, {z0}), std::invalid_argument);

    // Baseline: a single grid point reproduces ||X(z)^{-1} - m I||_max.
    Scenario base = s;
    base.rows.clear();
    base.cols.clear();
    base.C.resize(0, 0);
    base.jordan = {};
    base.N_grid = {40};
    base.trials = 1;
    const cplx z(0.2, 1.1);
    const auto b = run_resolvent_error(base, {z});
    const Eigen::MatrixXd x = sample_wigner_real({EnsembleKind::WignerReal, 40, 1, cell_seed(base, 40, 0)});
    CMatrix d = (x.cast<cplx>() - z * CMatrix::Identity(40, 40)).inverse();
    d.diagonal().array() -= m_wigner(z);
    CHECK(stat(b, "sup_error")[0] == doctest::Approx(d.cwiseAbs().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("window scan") {
    Scenario s;
    s.name = "scan";
    s.family = Family::WindowScan;
    s.N_grid = {1000};
    s.trials = 1;
    s.raster = {-1.0, 1.0, 1.0, 2.0};

    SUBCASE("A = 0 keeps the whole raster") {
        s.N_grid = {50};
        const auto r = run_window_scan(s, 0.1);
        CHECK(r.raster.size() == 21 * 11);
        for (const auto& row : r.raster) CHECK(row.inside);
        CHECK(r.spectra.size() == 50);
    }
    SUBCASE("C4 excludes a connected blob around 3i/2") {
        s.rows = {0};
        s.cols = {0};
        s.C = CMatrix::Constant(1, 1, 2.0 * I);
        s.jordan = {{{2.0 * I, {1}}}};
        const double h = 0.02;
        const auto r = run_window_scan(s, h);
        const int nx = 101, ny = 51;
        REQUIRE(r.raster.size() == static_cast<std::size_t>(nx * ny));
        std::vector<char> out(r.raster.size());
        int excluded = 0, start = -1;
        for (std::size_t i = 0; i < r.raster.size(); ++i) {
            out[i] = !r.raster[i].inside;
            excluded += out[i];
            if (out[i] && std::abs(cplx(r.raster[i].x, r.raster[i].y) - 1.5 * I) < h) start = static_cast<int>(i);
        }
        REQUIRE(start >= 0);
        // Flood fill from the limit point reaches every excluded cell.
        std::vector<char> seen(out.size(), 0);
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        int reached = 0;
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            ++reached;
            const int x = i % nx, y = i / nx;
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int xx = x + dx, yy = y + dy;
                if (xx < 0 || yy < 0 || xx >= nx || yy >= ny) continue;
                const int j = yy * nx + xx;
                if (out[j] && !seen[j]) {
                    seen[j] = 1;
                    q.push(j);
                }
            }
        }
        CHECK(reached == excluded);
        // ||K^{-1}|| = N^beta on a circle of radius about 5 N^-beta here.
        const double predicted = 2.0 * 5.0 * std::pow(1000.0, -0.45);
        const double diameter = stat(r, "excluded_diameter")[0];
        CHECK(diameter > 0.8 * predicted);
        CHECK(diameter < 1.25 * predicted);
        int above = 0;
        for (const auto& row : r.spectra) above += row.value.imag() > 1.0;
        CHECK(above == 1);
    }
}

TEST_CASE("HX, quadratic and Hankel families") {
    Scenario hx;
    hx.name = "hx";
    hx.family = Family::HXProduct;
    hx.N_grid = {300};
    hx.trials = 2;
    hx.hx_c = {-1.0, -2.0, -2.0};
    const auto h = run_outlier_convergence(hx);
    CHECK(h.predictions.size() == 4);
    for (double u : stat(h, "upper_count")) CHECK(u >= 0.0);
    CHECK(h.spectra.size() == 600);

    Scenario quad;
    quad.name = "quad";
    quad.family = Family::Quadratic;
    quad.N_grid = {40};
    quad.trials = 2;
    quad.target = 0.3223;
    const auto qr = run_outlier_convergence(quad);
    CHECK(stat(qr, "nonreal_count").size() == 2);
    CHECK(qr.notes.count("nonreal_trials") == 1);
    REQUIRE(qr.predictions.size() == 1);
    CHECK(qr.predictions[0].degenerate);
    CHECK(std::abs(qr.predictions[0].z0) < 1e-8);

    Scenario hk;
    hk.name = "hk";
    hk.family = Family::Hankel;
    hk.N_grid = {8, 16};
    hk.modes = {{1.0, 0.9}, {cplx(0.5, 0.5), std::polar(0.5, std::numbers::pi / 4.0)}};
    hk.hit_radius = 1e-8;
    const auto rec = run_experiment(hk);
    REQUIRE(rec.frequency);
    CHECK(rec.frequency->frequency == 1.0);

    hk.hankel_task = HankelTask::NoiseResolvent;
    hk.poles = {0.9, std::polar(0.5, std::numbers::pi / 4.0)};
    hk.noise_sigma = 1.0;
    hk.N_grid = {16, 32};
    hk.trials = 5;
    const auto noise = run_experiment(hk);
    REQUIRE(noise.frequency);
    CHECK(noise.frequency->total == 200);
    CHECK(noise.rate.slope);
}

TEST_CASE("wall-clock budget stops scheduling") {
    RunOptions o;
    o.budget_seconds = 0.0;
    const auto r = run_experiment(spike("budget", 1, {100, 200}, 2), o);
    CHECK_FALSE(r.complete);
    CHECK(r.cells_done < r.cells_total);
    CHECK(r.cells_total == 4);
}

TEST_CASE("family-checked entry points") {
    Scenario w;
    w.name = "w";
    w.family = Family::WindowScan;
    CHECK_THROWS_AS(run_outlier_convergence(w), std::invalid_argument);
    CHECK_THROWS_AS(run_resolvent_error(w, {I}), std::invalid_argument);
    CHECK_THROWS_AS(run_window_scan(spike("s", 1, {100}, 1), 0.1), std::invalid_argument);
}
