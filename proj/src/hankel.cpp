#include "speclab/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "speclab/rng.hpp"

namespace speclab {

void SignalModel::validate() const {
    if (n < 1) throw std::invalid_argument("signal model: n must be positive");
    if (static_cast<int>(modes.size()) > n) throw std::invalid_argument("signal model: more modes than n");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw std::invalid_argument("signal model: sigma must be >= 0");
    for (const auto& m : modes)
        if (!(std::abs(m.pole) < 1.0)) throw std::invalid_argument("signal model: poles must lie inside the unit disk");
}

CVector synth_signal(const SignalModel& model) {
    model.validate();
    const int len = 2 * model.n;
    CVector s = CVector::Zero(len);
    for (const auto& m : model.modes) {
        cplx power = 1.0;
        for (int j = 0; j < len; ++j) {
            s(j) += m.amplitude * power;
            power *= m.pole;
        }
    }
    if (model.noise_sigma > 0.0) {
        GaussianSource g(model.seed);
        for (int j = 0; j < len; ++j) s(j) += model.noise_sigma * g();
    }
    return s;
}

HankelPencil hankel_pencil(const CVector& s) {
    if (s.size() == 0 || s.size() % 2 != 0) throw std::invalid_argument("hankel_pencil needs a nonempty even-length sequence");
    const Eigen::Index n = s.size() / 2;
    HankelPencil h{CMatrix(n, n), CMatrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            h.U0(i, j) = s(i + j);
            h.U1(i, j) = s(i + j + 1);
        }
    return h;
}

std::vector<cplx> pencil_modes(const CMatrix& U0, const CMatrix& U1, int k) {
    const Eigen::Index n = U0.rows();
    if (U0.cols() != n || U1.rows() != n || U1.cols() != n) throw std::invalid_argument("pencil_modes: U0 and U1 must be n x n");
    if (k < 1 || k > n) throw std::invalid_argument("pencil_modes: need 1 <= k <= n");
    const Eigen::BDCSVD<CMatrix> svd(U0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < n && sv(rank) > 1e-10 * sv(0)) ++rank;
    if (rank == 0) throw ModeCountError("pencil_modes: U0 is zero", 0);

    const double n0 = sv(0), n1 = U1.norm();
    int found = 0;
    for (Eigen::Index r = std::min<Eigen::Index>(k, rank); r <= rank; ++r) {
        const CMatrix ur = svd.matrixU().leftCols(r);
        const CMatrix vr = svd.matrixV().leftCols(r);
        const CMatrix reduced = sv.head(r).cwiseInverse().asDiagonal() * (ur.adjoint() * U1 * vr);
        const Eigen::ComplexEigenSolver<CMatrix> es(reduced);
        if (es.info() != Eigen::Success) throw NonConvergenceError("pencil_modes: reduced eigenproblem failed");
        struct Cand {
            cplx z;
            double residual;
        };
        std::vector<Cand> cands;
        for (Eigen::Index i = 0; i < r; ++i) {
            const cplx z = es.eigenvalues()(i);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1.0 + 1e-12) continue;
            const CVector v = vr * es.eigenvectors().col(i);
            const double res = (z * (U0 * v) - U1 * v).norm() / ((std::abs(z) * n0 + n1) * v.norm());
            cands.push_back({z, res});
        }
        found = static_cast<int>(cands.size());
        if (found < k) continue;
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            const bool ia = std::abs(a.z) < 1.0, ib = std::abs(b.z) < 1.0;
            if (ia != ib) return ia;
            return a.residual < b.residual;
        });
        std::vector<cplx> out;
        for (int i = 0; i < k; ++i) out.push_back(cands[i].z);
        return out;
    }
    throw ModeCountError("pencil_modes: fewer admissible eigenvalues than requested", found);
}

std::vector<double> match_modes(const std::vector<cplx>& estimates, const std::vector<cplx>& truth) {
    if (estimates.size() != truth.size() || truth.size() > 8) {
        throw std::invalid_argument("match_modes: equal sizes up to 8 required");
    }
    std::vector<std::size_t> perm(truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_total = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i) total += std::abs(estimates[perm[i]] - truth[i]);
        if (total < best_total) {
            best_total = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<double> out(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) out[i] = std::abs(estimates[best[i]] - truth[i]);
    return out;
}

CMatrix mode_rotation(const std::vector<cplx>& poles, int n) {
    const int k = static_cast<int>(poles.size());
    if (k < 1 || k > n) throw std::invalid_argument("mode_rotation: need 1 <= #poles <= n");
    CMatrix a(n, k);
    for (int j = 0; j < k; ++j) {
        cplx power = 1.0;
        for (int i = 0; i < n; ++i) {
            a(i, j) = power;
            power *= poles[j];
        }
    }
    const Eigen::HouseholderQR<CMatrix> qr(a);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    return q.adjoint();
}

std::optional<double> noise_resolvent_sample(int n, cplx z_probe, double sigma, std::uint64_t seed,
                                             const std::vector<cplx>& poles) {
    const int k = static_cast<int>(poles.size());
    const CMatrix qk = mode_rotation(poles, n).adjoint().leftCols(k);
    SignalModel noise;
    noise.n = n;
    noise.noise_sigma = sigma;
    noise.seed = seed;
    const auto h = hankel_pencil(synth_signal(noise));
    const Eigen::PartialPivLU<CMatrix> lu(z_probe * h.U0 - h.U1);
    if (!(lu.rcond() >= kSingularRcond)) return std::nullopt;
    return (qk.adjoint() * lu.solve(qk)).cwiseAbs().maxCoeff();
}

Frequency bootstrap_slope_frequency(const std::vector<std::pair<int, double>>& samples, double lo, double hi,
                                    int resamples, std::uint64_t seed) {
    if (resamples < 1) throw std::invalid_argument("bootstrap_slope_frequency: resamples must be positive");
    std::map<int, std::vector<double>> by_n;
    for (const auto& [n, v] : samples) by_n[n].push_back(v);
    if (by_n.size() < 2) throw std::invalid_argument("bootstrap_slope_frequency: need two distinct n");
    std::mt19937_64 eng(seed);
    std::vector<bool> hits;
    for (int b = 0; b < resamples; ++b) {
        std::vector<std::pair<double, double>> meds;
        for (const auto& [n, vals] : by_n) {
            std::vector<double> resample(vals.size());
            for (auto& r : resample) r = vals[eng() % vals.size()];
            meds.emplace_back(n, median(resample));
        }
        const double slope = *fit_loglog(meds).slope;
        hits.push_back(slope >= lo && slope <= hi);
    }
    return empirical_high_probability(hits);
}

NoiseDecayResult noise_resolvent_decay(const std::vector<int>& n_grid, cplx z_probe, int trials, double sigma,
                                       std::uint64_t seed, const std::vector<cplx>& poles, int bootstrap) {
    if (trials < 1) throw std::invalid_argument("noise_resolvent_decay: trials must be positive");
    if (n_grid.empty()) throw std::invalid_argument("noise_resolvent_decay: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("noise_resolvent_decay: n grid must increase");
    if (!(sigma > 0.0)) throw std::invalid_argument("noise_resolvent_decay: sigma must be positive");
    if (std::abs(std::abs(z_probe) - 1.0) < 1e-6) throw std::invalid_argument("noise_resolvent_decay: z on the unit circle");
    const int k = static_cast<int>(poles.size());
    if (k < 1 || k > n_grid.front()) throw std::invalid_argument("noise_resolvent_decay: need 1 <= #poles <= n");

    NoiseDecayResult out;
    for (const int n : n_grid)
        for (int t = 0; t < trials; ++t) {
            const auto v = noise_resolvent_sample(
                n, z_probe, sigma, derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)}), poles);
            if (v)
                out.samples.emplace_back(n, *v);
            else
                ++out.discarded;
        }
    out.rate = rate_from_samples(out.samples);
    out.conjecture_consistent = out.rate.slope && *out.rate.slope >= -0.7 && *out.rate.slope <= -0.3;
    if (bootstrap > 0 && out.rate.slope)
        out.bootstrap = bootstrap_slope_frequency(out.samples, -0.7, -0.3, bootstrap, derive_seed(seed, {hash_name("bootstrap")}));
    return out;
}

}  // namespace speclab
