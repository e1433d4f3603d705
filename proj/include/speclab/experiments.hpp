#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speclab/hankel.hpp"
#include "speclab/jordan.hpp"
#include "speclab/matops.hpp"
#include "speclab/outliers.hpp"
#include "speclab/stats.hpp"
#include "speclab/stieltjes.hpp"

namespace speclab {

enum class Family { MatrixSpike, BulkImag, HXProduct, Quadratic, Hankel, ResolventError, WindowScan };

const char* family_name(Family f);

/// How MatrixSpike cells find the eigenvalues near a limit point. Auto takes
/// the Krylov projection unless the full spectrum is needed for counting.
enum class SpikeRoute { Auto, Dense, Krylov };

enum class HankelTask { Recovery, NoiseResolvent };

/// One Monte Carlo design. Only the fields of the scenario's family are read.
struct Scenario {
    std::string name;
    Family family = Family::MatrixSpike;
    LimitLaw law = LimitLaw::wigner();
    std::vector<int> N_grid{1000};
    int trials = 1;
    std::uint64_t seed = 0;
    double beta = 0.45;
    double omega = 0.9;

    // P C Q on coordinates; empty rows means A = 0. jordan describes D = C Q P.
    std::vector<int> rows;
    std::vector<int> cols;
    CMatrix C;
    JordanSpec jordan;
    // Port-Hamiltonian variant of MatrixSpike: X = -Z for square
    // Marchenko-Pastur Z, C = diag(i t) on the leading coordinates.
    std::vector<double> ph_t;
    SpikeRoute route = SpikeRoute::Auto;
    std::optional<double> count_radius;  // MatrixSpike: hit = count_near == k
    bool exclude_outliers = false;       // BulkImag: drop the k nearest per limit point

    std::vector<double> hx_c;  // HXProduct, H = diag(c) + I

    double zeta = 1.0;          // Quadratic (acoustic model)
    std::optional<cplx> target;  // Quadratic: hit = an eigenvalue within hit_radius

    HankelTask hankel_task = HankelTask::Recovery;
    std::vector<SignalMode> modes;
    double noise_sigma = 0.0;
    cplx z_probe = 2.0;
    std::vector<cplx> poles;  // NoiseResolvent rotation

    std::vector<cplx> grid;  // ResolventError
    Rectangle domain{-1.0, 1.0, 1.0, 2.0};
    double exclude_radius = 0.0;

    Rectangle raster{-1.0, 1.0, 1.0, 2.0};  // WindowScan
    double resolution = 0.01;

    double im_tol = 1e-6;  // |Im| above this counts as non-real
    double hit_radius = 0.15;
    std::optional<std::pair<double, double>> slope_range;
    std::optional<double> min_frequency;

    /// Throws std::invalid_argument.
    void validate() const;
    bool has_perturbation() const { return !rows.empty() || !ph_t.empty(); }
};

/// Limit points the scenario is measured against (non-degenerate and
/// degenerate alike; cells only use the non-degenerate ones).
std::vector<OutlierPrediction> scenario_predictions(const Scenario& scn);

struct RateRow {
    int N;
    int trial;
    std::uint64_t seed;
    std::string statistic;
    double value;
};

struct SpectrumRow {
    int N;
    int trial;
    std::uint64_t seed;
    cplx value;
};

struct RasterRow {
    int N;
    double x;
    double y;
    bool inside;
};

struct ExperimentResult {
    std::string scenario;
    std::vector<OutlierPrediction> predictions;
    std::string statistic;  // the fitted one
    RateEstimate rate;
    std::optional<Frequency> frequency;
    std::vector<RateRow> rates;
    std::vector<SpectrumRow> spectra;
    std::vector<RasterRow> raster;
    std::vector<std::pair<int, cplx>> dropped;  // ResolventError grid points outside the window
    std::map<std::string, double> notes;
    int cells_done = 0;
    int cells_total = 0;
    bool complete = true;
    bool pass = true;
};

struct RunOptions {
    int jobs = 1;
    std::optional<double> budget_seconds;  // no new cells after this
};

/// Cell (N, trial) uses seed derive_seed(seed, {hash_name(name), N, trial}).
/// Cells run on `jobs` threads; tables come out in (N, trial) order, so
/// they do not depend on the thread count.
ExperimentResult run_experiment(const Scenario& scn, const RunOptions& opts = {});

std::uint64_t cell_seed(const Scenario& scn, int N, int trial);

/// Family-checked entry points.
ExperimentResult run_outlier_convergence(const Scenario& scn, const RunOptions& opts = {});
ExperimentResult run_bulk_imag(const Scenario& scn, const RunOptions& opts = {});
ExperimentResult run_resolvent_error(Scenario scn, const std::vector<cplx>& grid, const RunOptions& opts = {});
ExperimentResult run_window_scan(Scenario scn, double resolution, const RunOptions& opts = {});

/// Eigen-decomposition of a real symmetric X reused for X(z)^{-1} at many z.
class SymmetricResolvent {
public:
    explicit SymmetricResolvent(Eigen::MatrixXd x);
    /// (X - z I)^{-1}.
    CMatrix operator()(cplx z) const;
    const Eigen::VectorXd& eigenvalues() const noexcept { return w_; }

private:
    Eigen::MatrixXd v_;
    Eigen::VectorXd w_;
};

}  // namespace speclab
