#include "speclab/ensembles.hpp"

#include <cmath>
#include <stdexcept>

#include "speclab/rng.hpp"

namespace speclab {

void EnsembleSpec::validate() const {
    if (N < 1) throw std::invalid_argument("ensemble N must be >= 1");
    if (kind == EnsembleKind::MarchenkoPastur) {
        if (M < 1) throw std::invalid_argument("ensemble M must be >= 1");
        constexpr double c = 4.0;
        const double n = N;
        const double m = M;
        if (N > 1 && (m < std::pow(n, 1.0 / c) || m > std::pow(n, c))) {
            throw std::invalid_argument("Marchenko-Pastur needs N^(1/4) <= M <= N^4");
        }
    }
}

Eigen::MatrixXd sample_wigner_real(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.kind != EnsembleKind::WignerReal) throw std::invalid_argument("sample_wigner_real needs WignerReal");
    const int n = spec.N;
    GaussianSource gauss(spec.seed);
    const double off = 1.0 / std::sqrt(static_cast<double>(n));
    const double diag = std::sqrt(2.0) * off;
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        w(i, i) = diag * gauss();
        for (int j = i + 1; j < n; ++j) {
            const double v = off * gauss();
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return w;
}

Eigen::MatrixXcd sample_wigner(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.kind == EnsembleKind::WignerReal) return sample_wigner_real(spec).cast<std::complex<double>>();
    if (spec.kind != EnsembleKind::WignerComplex) throw std::invalid_argument("sample_wigner needs a Wigner kind");
    const int n = spec.N;
    GaussianSource gauss(spec.seed);
    const double off = 1.0 / std::sqrt(2.0 * n);
    const double diag = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXcd w(n, n);
    for (int i = 0; i < n; ++i) {
        w(i, i) = {diag * gauss(), 0.0};
        for (int j = i + 1; j < n; ++j) {
            const double re = off * gauss();
            const double im = off * gauss();
            w(i, j) = {re, im};
            w(j, i) = {re, -im};
        }
    }
    return w;
}

MpSample sample_mp(const EnsembleSpec& spec) {
    spec.validate();
    if (spec.kind != EnsembleKind::MarchenkoPastur) throw std::invalid_argument("sample_mp needs MarchenkoPastur");
    GaussianSource gauss(spec.seed);
    const double scale = std::pow(static_cast<double>(spec.N) * spec.M, -0.25);
    Eigen::MatrixXd y(spec.M, spec.N);
    for (int i = 0; i < spec.M; ++i)
        for (int j = 0; j < spec.N; ++j) y(i, j) = scale * gauss();

    // Lower triangle only, then mirrored: exact symmetry.
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(spec.N, spec.N);
    x.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
    for (int j = 0; j < spec.N; ++j)
        for (int i = j + 1; i < spec.N; ++i) x(j, i) = x(i, j);
    return {y.cast<std::complex<double>>(), x.cast<std::complex<double>>()};
}

}  // namespace speclab
