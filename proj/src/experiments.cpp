#include "speclab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <cblas.h>

#include "lapack.hpp"
#include "speclab/ensembles.hpp"
#include "speclab/perturbation.hpp"
#include "speclab/polyeig.hpp"
#include "speclab/rng.hpp"

namespace speclab {

namespace {

constexpr cplx I{0.0, 1.0};

bool inside(const Rectangle& r, cplx z) {
    return z.real() >= r.re_min && z.real() <= r.re_max && z.imag() >= r.im_min && z.imag() <= r.im_max;
}

void check_rectangle(const Rectangle& r, const char* what) {
    if (!(r.re_min < r.re_max) || !(r.im_min < r.im_max)) throw std::invalid_argument(std::string(what) + ": empty rectangle");
}

struct Cell {
    int N = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> stats;
    std::vector<cplx> spectrum;
    std::vector<RasterRow> raster;
    std::optional<double> primary;
    std::optional<bool> hit;
};

const char* primary_statistic(const Scenario& scn) {
    switch (scn.family) {
        case Family::MatrixSpike:
        case Family::HXProduct: return "delta";
        case Family::BulkImag: return "Delta";
        case Family::Quadratic: return "nearest_target";
        case Family::Hankel: return scn.hankel_task == HankelTask::Recovery ? "mode_error" : "block_norm";
        case Family::ResolventError: return "sup_error";
        case Family::WindowScan: return "excluded_diameter";
    }
    return "";
}

PerturbationModel coordinate_model(const Scenario& scn, int N) {
    if (!scn.ph_t.empty()) {
        const int n = static_cast<int>(scn.ph_t.size());
        CMatrix c = CMatrix::Zero(n, n);
        std::vector<int> idx(n);
        for (int j = 0; j < n; ++j) {
            c(j, j) = I * scn.ph_t[j];
            idx[j] = j;
        }
        return PerturbationModel::coordinate(N, idx, idx, MatrixPoly::constant(c));
    }
    return PerturbationModel::coordinate(N, scn.rows, scn.cols, MatrixPoly::constant(scn.C));
}

bool is_corner(const Scenario& scn) {
    return scn.ph_t.empty() && scn.rows == std::vector<int>{0} && scn.cols == std::vector<int>{0};
}

std::vector<OutlierPrediction> live(const std::vector<OutlierPrediction>& preds) {
    std::vector<OutlierPrediction> out;
    for (const auto& p : preds)
        if (!p.degenerate) out.push_back(p);
    return out;
}

// The unperturbed matrix of a MatrixSpike/BulkImag/ResolventError/WindowScan cell.
Eigen::MatrixXd sample_real_x(const Scenario& scn, int N, std::uint64_t seed) {
    if (!scn.ph_t.empty() || scn.law.kind() == LawKind::MarchenkoPastur) {
        EnsembleSpec spec{EnsembleKind::MarchenkoPastur, N, static_cast<int>(std::lround(scn.law.phi() * N)), seed};
        const Eigen::MatrixXd z = sample_mp(spec).X.real();
        return scn.ph_t.empty() ? z : Eigen::MatrixXd(-z);
    }
    return sample_wigner_real({EnsembleKind::WignerReal, N, 1, seed});
}

std::vector<cplx> k_nearest(const std::vector<cplx>& spectrum, cplx z0, int k) {
    auto ordered = order_by_distance(spectrum, z0);
    ordered.resize(std::min<std::size_t>(ordered.size(), static_cast<std::size_t>(k)));
    return ordered;
}

double max_distance(const std::vector<cplx>& pts, cplx z0) {
    double d = 0.0;
    for (cplx p : pts) d = std::max(d, std::abs(p - z0));
    return d;
}

void spike_cell(const Scenario& scn, const std::vector<OutlierPrediction>& preds, Cell& cell) {
    const Eigen::MatrixXd x = sample_real_x(scn, cell.N, cell.seed);
    const auto model = coordinate_model(scn, cell.N);
    const bool dense = scn.route == SpikeRoute::Dense || (scn.route == SpikeRoute::Auto && scn.count_radius);
    std::vector<cplx> full;
    if (dense) {
        full = spike_spectrum(x.cast<cplx>(), model);
        cell.spectrum = full;
    }
    double delta = 0.0;
    bool hit = true;
    for (std::size_t j = 0; j < preds.size(); ++j) {
        const auto& p = preds[j];
        std::vector<cplx> near;
        if (dense) {
            near = k_nearest(full, p.z0, p.multiplicity);
        } else {
            const auto kr = spike_nearest_krylov(x, model, p.z0, p.multiplicity);
            near = kr.nearest;
            cell.spectrum.insert(cell.spectrum.end(), near.begin(), near.end());
            if (j == 0) cell.stats.emplace_back("krylov_dim", static_cast<double>(kr.dim));
        }
        const double d = max_distance(near, p.z0);
        delta = std::max(delta, d);
        if (j == 0) {
            cell.stats.emplace_back("nearest_re", near.front().real());
            cell.stats.emplace_back("nearest_im", near.front().imag());
        }
        if (scn.count_radius) {
            const int c = count_near(full, p.z0, *scn.count_radius);
            if (j == 0) cell.stats.emplace_back("count_near", c);
            hit = hit && c == p.multiplicity;
        } else {
            hit = hit && d < scn.hit_radius;
        }
    }
    cell.stats.emplace(cell.stats.begin(), "delta", delta);
    cell.primary = delta;
    cell.hit = hit;
}

void bulk_cell(const Scenario& scn, const std::vector<OutlierPrediction>& preds, Cell& cell) {
    const Eigen::MatrixXd x = sample_real_x(scn, cell.N, cell.seed);
    std::vector<cplx> spec = is_corner(scn) ? corner_spike_spectrum(x, scn.C(0, 0))
                                            : spike_spectrum(x.cast<cplx>(), coordinate_model(scn, cell.N));
    cell.spectrum = spec;
    if (scn.exclude_outliers) {
        for (const auto& p : preds) {
            spec = order_by_distance(std::move(spec), p.z0);
            spec.erase(spec.begin(), spec.begin() + std::min<std::ptrdiff_t>(p.multiplicity, spec.size()));
        }
    }
    double d = 0.0;
    for (cplx l : spec) d = std::max(d, std::abs(l.imag()));
    cell.stats.emplace_back("Delta", d);
    cell.primary = d;
}

void hx_cell(const Scenario& scn, const std::vector<OutlierPrediction>& preds, Cell& cell) {
    const CMatrix x = scn.law.kind() == LawKind::Wigner
                          ? CMatrix(sample_wigner_real({EnsembleKind::WignerReal, cell.N, 1, cell.seed}).cast<cplx>())
                          : sample_mp({EnsembleKind::MarchenkoPastur, cell.N,
                                       static_cast<int>(std::lround(scn.law.phi() * cell.N)), cell.seed})
                                .X;
    cell.spectrum = hx_spectrum(scn.hx_c, x).eigenvalues;
    int upper = 0, expected_upper = 0;
    for (cplx l : cell.spectrum)
        if (l.imag() > scn.im_tol) ++upper;
    double delta = 0.0;
    bool hit = true;
    for (const auto& p : preds) {
        if (p.z0.imag() > scn.im_tol) expected_upper += p.multiplicity;
        const double d = max_distance(k_nearest(cell.spectrum, p.z0, p.multiplicity), p.z0);
        delta = std::max(delta, d);
        hit = hit && d < scn.hit_radius;
    }
    cell.stats.emplace_back("delta", delta);
    cell.stats.emplace_back("upper_count", upper);
    cell.primary = delta;
    cell.hit = hit && upper == expected_upper;
}

void quadratic_cell(const Scenario& scn, Cell& cell) {
    const CMatrix x = sample_wigner_real({EnsembleKind::WignerReal, cell.N, 1, cell.seed}).cast<cplx>();
    const auto qs = quadratic_spectrum(acoustic_scenario(cell.N, scn.zeta), x);
    cell.spectrum = qs.finite;
    double nearest = std::numeric_limits<double>::infinity();
    double max_real = -std::numeric_limits<double>::infinity();
    int nonreal = 0;
    for (cplx l : qs.finite) {
        nearest = std::min(nearest, std::abs(l - *scn.target));
        if (std::abs(l.imag()) > scn.im_tol)
            ++nonreal;
        else
            max_real = std::max(max_real, l.real());
    }
    cell.stats.emplace_back("nearest_target", nearest);
    cell.stats.emplace_back("nonreal_count", nonreal);
    cell.stats.emplace_back("max_real", max_real);
    cell.stats.emplace_back("discarded", qs.discarded);
    cell.primary = nearest;
    cell.hit = nearest < scn.hit_radius;
}

void hankel_cell(const Scenario& scn, Cell& cell) {
    if (scn.hankel_task == HankelTask::Recovery) {
        SignalModel m;
        m.modes = scn.modes;
        m.n = cell.N;
        m.noise_sigma = scn.noise_sigma;
        m.seed = cell.seed;
        const auto h = hankel_pencil(synth_signal(m));
        std::vector<cplx> truth;
        for (const auto& mode : scn.modes) truth.push_back(mode.pole);
        const auto est = pencil_modes(h.U0, h.U1, static_cast<int>(truth.size()));
        cell.spectrum = est;
        const auto err = match_modes(est, truth);
        const double e = *std::max_element(err.begin(), err.end());
        cell.stats.emplace_back("mode_error", e);
        cell.primary = e;
        cell.hit = e < scn.hit_radius;
        return;
    }
    const auto v = noise_resolvent_sample(cell.N, scn.z_probe, scn.noise_sigma, cell.seed, scn.poles);
    if (!v) {
        cell.stats.emplace_back("discarded", 1.0);
        return;
    }
    cell.stats.emplace_back("block_norm", *v);
    cell.primary = *v;
}

std::vector<cplx> surviving_grid(const Scenario& scn, const std::vector<OutlierPrediction>& preds, int N) {
    std::vector<cplx> out;
    DeformedWindowParams wp;
    wp.beta = scn.beta;
    wp.omega = scn.omega;
    wp.base = DeformedWindowParams::Base::Rectangle;
    wp.re_min = scn.domain.re_min;
    wp.re_max = scn.domain.re_max;
    wp.im_min = scn.domain.im_min;
    wp.im_max = scn.domain.im_max;
    std::optional<PerturbationModel> model;
    if (scn.has_perturbation()) model = coordinate_model(scn, N);
    for (cplx z : scn.grid) {
        bool ok = inside(scn.domain, z);
        for (const auto& p : preds) ok = ok && std::abs(z - p.z0) >= scn.exclude_radius;
        if (ok && model) {
            try {
                ok = in_deformed_window(*model, scn.law, z, wp, N);
            } catch (const SingularMatrixError&) {
                ok = false;  // a zero of det K
            }
        }
        if (ok) out.push_back(z);
    }
    return out;
}

void resolvent_cell(const Scenario& scn, const std::vector<cplx>& grid, Cell& cell) {
    const SymmetricResolvent res(sample_real_x(scn, cell.N, cell.seed));
    std::optional<PerturbationModel> model;
    if (scn.has_perturbation()) model = coordinate_model(scn, cell.N);
    double sup = 0.0;
    for (cplx z : grid) {
        CMatrix r = res(z);
        double e;
        if (model) {
            e = resolvent_error_from_inverse(r, *model, scn.law, z);
        } else {
            r.diagonal().array() -= m_law(z, scn.law);
            e = r.cwiseAbs().maxCoeff();
        }
        sup = std::max(sup, e);
    }
    cell.stats.emplace_back("sup_error", sup);
    cell.primary = sup;
}

void window_cell(const Scenario& scn, Cell& cell) {
    const Eigen::MatrixXd x = sample_real_x(scn, cell.N, cell.seed);
    if (scn.has_perturbation()) {
        cell.spectrum = is_corner(scn) ? corner_spike_spectrum(x, scn.C(0, 0))
                                       : spike_spectrum(x.cast<cplx>(), coordinate_model(scn, cell.N));
    } else {
        cell.spectrum = spectrum(x);
    }
    if (cell.trial != 0) return;

    DeformedWindowParams wp;
    wp.beta = scn.beta;
    wp.omega = scn.omega;
    wp.base = DeformedWindowParams::Base::Rectangle;
    wp.re_min = scn.raster.re_min;
    wp.re_max = scn.raster.re_max;
    wp.im_min = scn.raster.im_min;
    wp.im_max = scn.raster.im_max;
    std::optional<PerturbationModel> model;
    if (scn.has_perturbation()) model = coordinate_model(scn, cell.N);
    const int nx = static_cast<int>(std::floor((scn.raster.re_max - scn.raster.re_min) / scn.resolution + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor((scn.raster.im_max - scn.raster.im_min) / scn.resolution + 1e-9)) + 1;
    std::vector<cplx> excluded;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const cplx z(scn.raster.re_min + i * scn.resolution, scn.raster.im_min + j * scn.resolution);
            bool in = true;
            if (model) {
                try {
                    in = in_deformed_window(*model, scn.law, z, wp, cell.N);
                } catch (const SingularMatrixError&) {
                    in = false;
                }
            }
            cell.raster.push_back({cell.N, z.real(), z.imag(), in});
            if (!in) excluded.push_back(z);
        }
    double diameter = 0.0;
    for (std::size_t a = 0; a < excluded.size(); ++a)
        for (std::size_t b = a + 1; b < excluded.size(); ++b) diameter = std::max(diameter, std::abs(excluded[a] - excluded[b]));
    cell.stats.emplace_back("excluded_cells", static_cast<double>(excluded.size()));
    cell.stats.emplace_back("excluded_diameter", diameter);
    if (diameter > 0.0) cell.primary = diameter;
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::MatrixSpike: return "MatrixSpike";
        case Family::BulkImag: return "BulkImag";
        case Family::HXProduct: return "HXProduct";
        case Family::Quadratic: return "Quadratic";
        case Family::Hankel: return "Hankel";
        case Family::ResolventError: return "ResolventError";
        case Family::WindowScan: return "WindowScan";
    }
    return "?";
}

void Scenario::validate() const {
    if (name.empty()) throw std::invalid_argument("scenario: empty name");
    if (N_grid.empty()) throw std::invalid_argument("scenario: empty N grid");
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        if (N_grid[i] < 2) throw std::invalid_argument("scenario: N must be at least 2");
        if (i > 0 && N_grid[i] <= N_grid[i - 1]) throw std::invalid_argument("scenario: N grid must be strictly increasing");
    }
    if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
    if (!(beta > 0.0) || !(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("scenario: need beta > 0 and omega in (0, 1)");
    if (rows.size() != cols.size()) throw std::invalid_argument("scenario: P and Q must have the same rank");
    if (!rows.empty()) {
        const auto n = static_cast<Eigen::Index>(rows.size());
        if (C.rows() != n || C.cols() != n) throw std::invalid_argument("scenario: C must be n x n");
        jordan.validate(static_cast<int>(n));
        for (int i : rows)
            if (i < 0 || i >= N_grid.front()) throw std::invalid_argument("scenario: P coordinate out of range");
        for (int i : cols)
            if (i < 0 || i >= N_grid.front()) throw std::invalid_argument("scenario: Q coordinate out of range");
    }
    if (!ph_t.empty() && !rows.empty()) throw std::invalid_argument("scenario: port-Hamiltonian t replaces P C Q");
    if (static_cast<int>(ph_t.size()) > N_grid.front()) throw std::invalid_argument("scenario: too many t_j");
    switch (family) {
        case Family::MatrixSpike:
            if (!has_perturbation()) throw std::invalid_argument("scenario: MatrixSpike needs a perturbation");
            if (route == SpikeRoute::Krylov && count_radius) throw std::invalid_argument("scenario: counting needs the dense route");
            break;
        case Family::BulkImag:
            if (!has_perturbation()) throw std::invalid_argument("scenario: BulkImag needs a perturbation");
            break;
        case Family::HXProduct:
            if (hx_c.empty() || static_cast<int>(hx_c.size()) > N_grid.front()) throw std::invalid_argument("scenario: bad c list");
            break;
        case Family::Quadratic:
            if (!target) throw std::invalid_argument("scenario: Quadratic needs a target point");
            if (!(zeta > 0.0)) throw std::invalid_argument("scenario: zeta must be positive");
            break;
        case Family::Hankel:
            if (hankel_task == HankelTask::Recovery) {
                if (modes.empty()) throw std::invalid_argument("scenario: Hankel recovery needs modes");
                if (static_cast<int>(modes.size()) > N_grid.front()) throw std::invalid_argument("scenario: more modes than n");
            } else {
                if (poles.empty() || static_cast<int>(poles.size()) > N_grid.front()) throw std::invalid_argument("scenario: bad poles");
                if (!(noise_sigma > 0.0)) throw std::invalid_argument("scenario: noise sigma must be positive");
            }
            break;
        case Family::ResolventError:
            if (grid.empty()) throw std::invalid_argument("scenario: empty resolvent grid");
            check_rectangle(domain, "scenario domain");
            if (law.kind() != LawKind::Wigner && ph_t.empty()) throw std::invalid_argument("scenario: resolvent sweeps use the Wigner law");
            break;
        case Family::WindowScan:
            check_rectangle(raster, "scenario raster");
            if (!(resolution > 0.0)) throw std::invalid_argument("scenario: resolution must be positive");
            break;
    }
    if (slope_range && !(slope_range->first <= slope_range->second)) throw std::invalid_argument("scenario: bad slope range");
}

std::vector<OutlierPrediction> scenario_predictions(const Scenario& scn) {
    switch (scn.family) {
        case Family::HXProduct: return hx_outliers(scn.hx_c, scn.law);
        case Family::Quadratic: {
            const auto q = acoustic_scenario(2, scn.zeta);
            QuadraticRootOptions o;
            o.mode = BoundaryMode::LimitFromAbove;
            return quadratic_outliers(q.p, q.q, scn.law, {-1.2, 1.2, -1.2, 1.2}, o);
        }
        case Family::Hankel: {
            std::vector<OutlierPrediction> out;
            if (scn.hankel_task != HankelTask::Recovery) return out;
            for (const auto& m : scn.modes) {
                OutlierPrediction p;
                p.z0 = m.pole;
                p.rate_exponent = std::numeric_limits<double>::quiet_NaN();
                out.push_back(p);
            }
            return out;
        }
        default: break;
    }
    if (!scn.ph_t.empty()) return port_hamiltonian_outliers(scn.ph_t);
    if (scn.rows.empty()) return {};
    return matrix_spike_predictions(scn.jordan, scn.law).predictions;
}

std::uint64_t cell_seed(const Scenario& scn, int N, int trial) {
    return derive_seed(scn.seed, {hash_name(scn.name), static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(trial)});
}

SymmetricResolvent::SymmetricResolvent(Eigen::MatrixXd x) : v_(std::move(x)), w_(v_.rows()) {
    const auto n = static_cast<lapack_int>(v_.rows());
    if (v_.cols() != v_.rows()) throw std::invalid_argument("SymmetricResolvent: square matrix required");
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, v_.data(), n, w_.data());
    if (info != 0) throw NonConvergenceError("dsyevd failed with info " + std::to_string(info));
}

CMatrix SymmetricResolvent::operator()(cplx z) const {
    const auto n = static_cast<int>(v_.rows());
    Eigen::MatrixXd re_part(n, n), im_part(n, n);
    Eigen::VectorXd re(n), im(n);
    for (int k = 0; k < n; ++k) {
        const cplx d = 1.0 / (w_(k) - z);
        re(k) = d.real();
        im(k) = d.imag();
    }
    // V diag(d) V^T, real and imaginary parts separately.
    const Eigen::MatrixXd vr = v_ * re.asDiagonal();
    const Eigen::MatrixXd vi = v_ * im.asDiagonal();
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, n, n, n, 1.0, vr.data(), n, v_.data(), n, 0.0, re_part.data(), n);
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, n, n, n, 1.0, vi.data(), n, v_.data(), n, 0.0, im_part.data(), n);
    CMatrix out(n, n);
    out.real() = re_part;
    out.imag() = im_part;
    return out;
}

ExperimentResult run_experiment(const Scenario& scn, const RunOptions& opts) {
    scn.validate();
    if (opts.jobs < 1) throw std::invalid_argument("run_experiment: jobs must be >= 1");
    if (opts.budget_seconds && !(*opts.budget_seconds >= 0.0)) throw std::invalid_argument("run_experiment: negative budget");
    // Cells are the unit of parallelism; a threaded BLAS underneath would
    // only oversubscribe the cores.
    openblas_set_num_threads(1);

    ExperimentResult res;
    res.scenario = scn.name;
    res.statistic = primary_statistic(scn);
    res.predictions = scenario_predictions(scn);
    const auto preds = live(res.predictions);
    if ((scn.family == Family::MatrixSpike || scn.family == Family::HXProduct) && preds.empty()) {
        throw std::invalid_argument("scenario " + scn.name + ": no prediction to measure against");
    }
    if (scn.family == Family::BulkImag && scn.exclude_outliers && preds.empty()) {
        throw std::invalid_argument("scenario " + scn.name + ": outlier exclusion without a prediction");
    }

    std::map<int, std::vector<cplx>> grids;
    if (scn.family == Family::ResolventError) {
        for (int N : scn.N_grid) {
            auto g = surviving_grid(scn, preds, N);
            for (cplx z : scn.grid)
                if (std::find(g.begin(), g.end(), z) == g.end()) res.dropped.emplace_back(N, z);
            if (g.empty()) throw std::invalid_argument("scenario " + scn.name + ": no grid point survives at N = " + std::to_string(N));
            grids[N] = std::move(g);
        }
    }

    std::vector<Cell> cells;
    for (int N : scn.N_grid)
        for (int t = 0; t < scn.trials; ++t) {
            Cell c;
            c.N = N;
            c.trial = t;
            c.seed = cell_seed(scn, N, t);
            cells.push_back(std::move(c));
        }
    res.cells_total = static_cast<int>(cells.size());

    const auto start = std::chrono::steady_clock::now();
    std::vector<char> done(cells.size(), 0);
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> out_of_time{false};
    auto worker = [&] {
        for (;;) {
            if (opts.budget_seconds) {
                const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
                if (el.count() > *opts.budget_seconds) {
                    out_of_time = true;
                    return;
                }
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            Cell& c = cells[i];
            try {
                switch (scn.family) {
                    case Family::MatrixSpike: spike_cell(scn, preds, c); break;
                    case Family::BulkImag: bulk_cell(scn, preds, c); break;
                    case Family::HXProduct: hx_cell(scn, preds, c); break;
                    case Family::Quadratic: quadratic_cell(scn, c); break;
                    case Family::Hankel: hankel_cell(scn, c); break;
                    case Family::ResolventError: resolvent_cell(scn, grids.at(c.N), c); break;
                    case Family::WindowScan: window_cell(scn, c); break;
                }
                done[i] = 1;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::min<int>(opts.jobs, static_cast<int>(cells.size()));
    std::vector<std::thread> pool;
    for (int j = 1; j < nthreads; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<std::pair<int, double>> samples;
    std::map<int, std::vector<bool>> hits;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!done[i]) continue;
        const Cell& c = cells[i];
        ++res.cells_done;
        for (const auto& [name, v] : c.stats) res.rates.push_back({c.N, c.trial, c.seed, name, v});
        for (cplx l : c.spectrum) res.spectra.push_back({c.N, c.trial, c.seed, l});
        res.raster.insert(res.raster.end(), c.raster.begin(), c.raster.end());
        if (c.primary) samples.emplace_back(c.N, *c.primary);
        if (c.hit) hits[c.N].push_back(*c.hit);
    }
    res.complete = res.cells_done == res.cells_total && !out_of_time;

    if (!samples.empty()) res.rate = rate_from_samples(samples);
    if (!hits.empty()) res.frequency = empirical_high_probability(hits.rbegin()->second);
    if (scn.family == Family::Hankel && scn.hankel_task == HankelTask::NoiseResolvent && res.rate.slope) {
        const auto [lo, hi] = scn.slope_range.value_or(std::pair{-0.7, -0.3});
        res.frequency = bootstrap_slope_frequency(samples, lo, hi, 200,
                                                  derive_seed(scn.seed, {hash_name(scn.name), hash_name("bootstrap")}));
    }
    if (scn.family == Family::Quadratic) {
        int nonreal_trials = 0;
        for (const auto& r : res.rates)
            if (r.statistic == "nonreal_count" && r.value > 0) ++nonreal_trials;
        res.notes["nonreal_trials"] = nonreal_trials;
    }
    if (scn.family == Family::Hankel || scn.family == Family::Quadratic) {
        int discarded = 0;
        for (const auto& r : res.rates)
            if (r.statistic == "discarded") discarded += static_cast<int>(r.value);
        res.notes["discarded"] = discarded;
    }

    if (scn.slope_range) {
        const auto [lo, hi] = *scn.slope_range;
        res.pass = res.pass && res.rate.slope && *res.rate.slope >= lo && *res.rate.slope <= hi;
    }
    if (scn.min_frequency) res.pass = res.pass && res.frequency && res.frequency->frequency >= *scn.min_frequency;
    return res;
}

ExperimentResult run_outlier_convergence(const Scenario& scn, const RunOptions& opts) {
    if (scn.family != Family::MatrixSpike && scn.family != Family::HXProduct && scn.family != Family::Quadratic) {
        throw std::invalid_argument("run_outlier_convergence: scenario family has no designated limit point");
    }
    return run_experiment(scn, opts);
}

ExperimentResult run_bulk_imag(const Scenario& scn, const RunOptions& opts) {
    if (scn.family != Family::BulkImag) throw std::invalid_argument("run_bulk_imag: BulkImag scenario required");
    return run_experiment(scn, opts);
}

ExperimentResult run_resolvent_error(Scenario scn, const std::vector<cplx>& grid, const RunOptions& opts) {
    if (scn.family != Family::ResolventError) throw std::invalid_argument("run_resolvent_error: ResolventError scenario required");
    scn.grid = grid;
    return run_experiment(scn, opts);
}

ExperimentResult run_window_scan(Scenario scn, double resolution, const RunOptions& opts) {
    if (scn.family != Family::WindowScan) throw std::invalid_argument("run_window_scan: WindowScan scenario required");
    scn.resolution = resolution;
    return run_experiment(scn, opts);
}

}  // namespace speclab
