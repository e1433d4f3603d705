#include "speclab/polyeig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace speclab {

std::vector<cplx> spike_spectrum(const CMatrix& x, const PerturbationModel& model) {
    if (model.C().degree() != 0) throw std::invalid_argument("spike_spectrum needs a constant C");
    if (x.rows() != model.N() || x.cols() != model.N()) throw std::invalid_argument("spike_spectrum: X must be N x N");
    return spectrum(CMatrix(x + eval_perturbation(model, 0.0)));
}

std::vector<cplx> corner_spike_spectrum(const Eigen::MatrixXd& w, cplx c) {
    const Tridiagonal t = tridiagonalize_fix_first(w);
    CVector d = t.d.cast<cplx>();
    if (d.size() > 0) d(0) += c;
    try {
        return complex_symmetric_tridiagonal_eigenvalues(d, t.e.cast<cplx>());
    } catch (const NonConvergenceError&) {
        CMatrix dense = w.cast<cplx>();
        dense(0, 0) += c;
        return spectrum(dense);
    }
}

KrylovSpikeResult spike_nearest_krylov(const Eigen::MatrixXd& x, const PerturbationModel& model, cplx z0, int k,
                                       double tol, int blocks_per_check) {
    if (model.C().degree() != 0) throw std::invalid_argument("spike_nearest_krylov needs a constant C");
    if (x.rows() != model.N() || x != x.transpose()) throw std::invalid_argument("spike_nearest_krylov: X must be real symmetric N x N");
    if (k < 1 || blocks_per_check < 1) throw std::invalid_argument("spike_nearest_krylov: k and blocks_per_check must be positive");
    if ((model.P().imag().array() != 0.0).any() || (model.Q().imag().array() != 0.0).any()) {
        throw std::invalid_argument("spike_nearest_krylov: P and Q must be real");
    }
    const Eigen::Index n = model.n();
    Eigen::MatrixXd start(x.rows(), 2 * n);
    start << model.P().real(), model.Q().real().transpose();
    BlockLanczos lz(x, start);
    const CMatrix c = model.C()(0.0);

    KrylovSpikeResult out;
    std::vector<cplx> prev;
    int stable_checks = 0;
    for (;;) {
        const bool more = lz.extend(blocks_per_check);
        const Eigen::MatrixXd& v = lz.basis();
        CMatrix g = lz.projected().cast<cplx>();
        g += (v.transpose() * model.P().real()).cast<cplx>() * c * (model.Q().real() * v).cast<cplx>();
        auto ev = order_by_distance(spectrum(g), z0);
        if (static_cast<int>(ev.size()) > k) ev.resize(k);
        out.dim = lz.dim();
        if (!more) {
            out.nearest = ev;
            out.converged = true;
            return out;
        }
        if (prev.size() == ev.size()) {
            double change = 0.0;
            for (std::size_t i = 0; i < ev.size(); ++i) change = std::max(change, std::abs(ev[i] - prev[i]));
            stable_checks = change <= tol * (1.0 + std::abs(z0)) ? stable_checks + 1 : 0;
            if (stable_checks >= 2) {
                out.nearest = ev;
                out.converged = true;
                return out;
            }
        }
        prev = std::move(ev);
    }
}

HxSpectrum hx_spectrum(const std::vector<double>& c, const CMatrix& x, bool verify) {
    const Eigen::Index N = x.rows();
    if (x.cols() != N) throw std::invalid_argument("hx_spectrum: X must be square");
    if (static_cast<Eigen::Index>(c.size()) > N) throw std::invalid_argument("hx_spectrum: more c_j than rows");
    for (double cj : c)
        if (cj == 0.0 || !std::isfinite(cj)) throw std::invalid_argument("hx_spectrum: every c_j must be finite and nonzero");
    CMatrix hx = x;
    for (std::size_t j = 0; j < c.size(); ++j) hx.row(static_cast<Eigen::Index>(j)) *= c[j];
    HxSpectrum out;
    out.eigenvalues = spectrum(hx);
    if (verify) {
        // X - z (I - P C Q) with I - P C Q = diag(1/c_j) + I.
        CMatrix b = CMatrix::Identity(N, N);
        for (std::size_t j = 0; j < c.size(); ++j) b(j, j) = 1.0 / c[j];
        const PencilSpectrum ps = generalized_spectrum(x, b);
        out.pencil_discrepancy = ps.infinite == 0 ? multiset_distance(out.eigenvalues, ps.finite)
                                                  : std::numeric_limits<double>::infinity();
    }
    return out;
}

double multiset_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<cplx> pool = b;
    double worst = 0.0;
    for (cplx v : a) {
        auto best = std::min_element(pool.begin(), pool.end(),
                                     [v](cplx l, cplx r) { return std::abs(l - v) < std::abs(r - v); });
        worst = std::max(worst, std::abs(*best - v));
        pool.erase(best);
    }
    return worst;
}

void QuadraticScenario::validate() const {
    if (u.size() == 0) throw std::invalid_argument("quadratic scenario: u is empty");
    if (std::abs(u.norm() - 1.0) > 1e-12) throw std::invalid_argument("quadratic scenario: u must be a unit vector");
    const auto support = (u.array() != cplx(0.0, 0.0)).count();
    if (support > max_support) throw std::invalid_argument("quadratic scenario: u has too many nonzeros");
    if (p.degree() < 1 && q.degree() < 1) throw std::invalid_argument("quadratic scenario: p or q must depend on z");
}

namespace {

// Coefficient A_i of X - p(z) I + q(z) u u^*.
CMatrix poly_coefficient(const QuadraticScenario& scn, const CMatrix& x, int i) {
    const Eigen::Index N = x.rows();
    CMatrix a = (-scn.p.coeff(i)) * CMatrix::Identity(N, N);
    if (i == 0) a += x;
    const cplx qi = scn.q.coeff(i);
    if (qi != cplx(0.0, 0.0)) a += qi * scn.u * scn.u.adjoint();
    return a;
}

}  // namespace

QuadraticSpectrum quadratic_spectrum(const QuadraticScenario& scn, const CMatrix& x) {
    scn.validate();
    const Eigen::Index N = x.rows();
    if (x.cols() != N || scn.u.size() != N) throw std::invalid_argument("quadratic_spectrum: size mismatch");
    const int d = std::max(scn.p.degree(), scn.q.degree());

    // Leading coefficient -p_d I + q_d u u^*: eigenvalue -p_d (N-1 times) and q_d - p_d along u.
    const cplx pd = scn.p.coeff(d), qd = scn.q.coeff(d);
    const double scale = std::abs(pd) + std::abs(qd);
    int defect = 0;
    if (std::abs(pd) <= 1e-14 * scale) defect += static_cast<int>(N) - 1;
    if (std::abs(qd - pd) <= 1e-14 * scale) defect += 1;
    if (defect > 0) throw PolynomialDegeneracyError("quadratic_spectrum: singular leading coefficient", defect);

    const CMatrix lead = poly_coefficient(scn, x, d);
    const auto lu = lead.partialPivLu();
    const Eigen::Index D = d * N;
    CMatrix comp = CMatrix::Zero(D, D);
    // First companion form: top block row -A_d^{-1} [A_{d-1} ... A_0], identities below.
    for (int j = 0; j < d; ++j) comp.block(0, j * N, N, N) = -lu.solve(poly_coefficient(scn, x, d - 1 - j));
    for (int j = 1; j < d; ++j) comp.block(j * N, (j - 1) * N, N, N) = CMatrix::Identity(N, N);

    QuadraticSpectrum out;
    for (cplx l : spectrum(comp)) {
        if (std::abs(l) > 1e8) {
            ++out.discarded;
            continue;
        }
        out.finite.push_back(l);
    }
    return out;
}

cplx secular_check(const QuadraticScenario& scn, const CMatrix& x, cplx z) {
    scn.validate();
    const Eigen::Index N = x.rows();
    if (x.cols() != N || scn.u.size() != N) throw std::invalid_argument("secular_check: size mismatch");
    const cplx qz = scn.q(z);
    if (qz == cplx(0.0, 0.0)) return 1.0;
    const CMatrix shifted = x - scn.p(z) * CMatrix::Identity(N, N);
    const auto lu = shifted.fullPivLu();
    const double rc = lu.rcond();
    if (!(rc >= kSingularRcond)) throw SingularMatrixError("secular_check: X - p(z) I is singular", rc);
    const CVector y = lu.solve(scn.u);
    return 1.0 + qz * scn.u.dot(y);
}

QuadraticScenario acoustic_scenario(int N, double zeta) {
    if (N < 1) throw std::invalid_argument("acoustic_scenario: N must be positive");
    if (!(zeta != 0.0) || !std::isfinite(zeta)) throw std::invalid_argument("acoustic_scenario: zeta must be nonzero");
    constexpr double pi = std::numbers::pi;
    QuadraticScenario s;
    s.p = ScalarPoly{-2.0, 0.0, 4.0 * pi * pi};
    s.q = ScalarPoly{-1.0, cplx(0.0, 2.0 * pi / zeta), 2.0 * pi * pi};
    s.u = CVector::Zero(N);
    s.u(N - 1) = 1.0;
    s.law = LimitLaw::wigner();
    s.zeta = zeta;
    return s;
}

}  // namespace speclab
