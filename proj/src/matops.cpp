#include "speclab/matops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lapack.hpp"

namespace speclab {

namespace {

double lp_norm(const CVector& v, Lp p) {
    switch (p) {
        case Lp::One: return v.cwiseAbs().sum();
        case Lp::Two: return v.norm();
        case Lp::Inf: return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    }
    return 0.0;
}

Lp dual(Lp p) {
    switch (p) {
        case Lp::One: return Lp::Inf;
        case Lp::Two: return Lp::Two;
        case Lp::Inf: return Lp::One;
    }
    return Lp::Two;
}

double max_column(const CMatrix& a, Lp q) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, lp_norm(a.col(j), q));
    return best;
}

double max_row(const CMatrix& a, Lp q) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) best = std::max(best, lp_norm(a.row(i).transpose(), q));
    return best;
}

void check_info(lapack_int info, const char* routine) {
    if (info < 0) throw std::invalid_argument(std::string(routine) + ": illegal argument " + std::to_string(-info));
    if (info > 0) throw NonConvergenceError(std::string(routine) + " did not converge (info " + std::to_string(info) + ")");
}

bool exactly_hermitian(const CMatrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (a(j, j).imag() != 0.0) return false;
        for (Eigen::Index i = j + 1; i < n; ++i)
            if (a(i, j) != std::conj(a(j, i))) return false;
    }
    return true;
}

bool exactly_real(const CMatrix& a) { return (a.imag().array() == 0.0).all(); }

std::vector<cplx> hermitian_spectrum(CMatrix a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd w(n);
    check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "zheevd");
    return {w.data(), w.data() + n};
}

std::vector<cplx> symmetric_spectrum(Eigen::MatrixXd a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd w(n);
    check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "dsyevd");
    return {w.data(), w.data() + n};
}

std::vector<cplx> real_general_spectrum(Eigen::MatrixXd a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd wr(n), wi(n);
    check_info(LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(), nullptr, 1, nullptr, 1),
               "dgeev");
    std::vector<cplx> out(n);
    for (lapack_int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
    return out;
}

std::vector<cplx> complex_general_spectrum(CMatrix a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    CVector w(n);
    check_info(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1), "zgeev");
    return {w.data(), w.data() + n};
}

void require_square(Eigen::Index rows, Eigen::Index cols, const char* who) {
    if (rows != cols) throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

void require_finite(const CMatrix& a, const char* who) {
    if (!a.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entry");
}

}  // namespace

double norm(const CMatrix& a, NormKind kind) {
    using Tag = NormKind::Tag;
    switch (kind.tag) {
        case Tag::Max: return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
        case Tag::OneToOne: return max_column(a, Lp::One);
        case Tag::InfToInf: return max_row(a, Lp::One);
        case Tag::Spectral:
            if (a.size() == 0) return 0.0;
            return Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
        case Tag::Mixed:
            // ||A||_{1,q}: worst column in l^q. ||A||_{p,inf}: worst row in the dual of l^p.
            if (kind.p == Lp::One && (kind.q == Lp::Inf || kind.q == Lp::Two)) return max_column(a, kind.q);
            if (kind.p == Lp::Two && kind.q == Lp::Inf) return max_row(a, dual(kind.p));
            throw std::invalid_argument("unsupported Mixed norm pair");
    }
    throw std::invalid_argument("unknown norm kind");
}

SparsityCounts sparsity_counts(const CMatrix& a) {
    SparsityCounts s;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        int count = 0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) count += a(i, j) != cplx(0.0, 0.0);
        s.rows = std::max(s.rows, count);
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        int count = 0;
        for (Eigen::Index i = 0; i < a.rows(); ++i) count += a(i, j) != cplx(0.0, 0.0);
        s.cols = std::max(s.cols, count);
    }
    return s;
}

KappaBounds kappa_bounds(const CMatrix& p, const CMatrix& q) {
    if (p.cols() != q.rows() || p.rows() != q.cols()) throw std::invalid_argument("kappa_bounds: P is N x n, Q is n x N");
    const double n = static_cast<double>(q.rows());
    const double r = sparsity_counts(q).rows;
    const double c = sparsity_counts(p).cols;
    const double qmax = norm(q, NormKind::max());
    const double pmax = norm(p, NormKind::max());
    return {n * r * qmax, n * c * pmax, n * r * c * qmax * pmax};
}

double rcond_2norm(const CMatrix& a) {
    require_square(a.rows(), a.cols(), "rcond_2norm");
    if (a.size() == 0) return 1.0;
    if (!a.allFinite()) return 0.0;
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(a).singularValues();
    const double top = s(0);
    if (top == 0.0) return 0.0;
    return s(s.size() - 1) / top;
}

CMatrix checked_inverse(const CMatrix& a, const char* what) {
    const double rc = rcond_2norm(a);
    if (rc < kSingularRcond) {
        throw SingularMatrixError(std::string(what) + " is numerically singular (rcond " + std::to_string(rc) + ")", rc);
    }
    return a.fullPivLu().inverse();
}

CMatrix woodbury_inverse(const CMatrix& xinv, const CMatrix& p, const CMatrix& cinv, const CMatrix& q) {
    const Eigen::Index N = xinv.rows();
    const Eigen::Index n = cinv.rows();
    require_square(N, xinv.cols(), "woodbury_inverse");
    require_square(n, cinv.cols(), "woodbury_inverse");
    if (p.rows() != N || p.cols() != n || q.rows() != n || q.cols() != N) {
        throw std::invalid_argument("woodbury_inverse: shape mismatch");
    }
    const CMatrix xp = xinv * p;  // N x n
    const CMatrix qx = q * xinv;  // n x N
    const CMatrix l = cinv + q * xp;
    const CMatrix linv = checked_inverse(l, "Woodbury capacitance L");
    CMatrix out = xinv;
    out.noalias() -= xp * (linv * qx);
    return out;
}

double det_diff_bound(const CMatrix& a, const CMatrix& b) {
    require_square(a.rows(), a.cols(), "det_diff_bound");
    if (b.rows() != a.rows() || b.cols() != a.cols()) throw std::invalid_argument("det_diff_bound: shape mismatch");
    const int k = static_cast<int>(a.rows());
    if (k > 8) throw std::invalid_argument("det_diff_bound: k > 8 refused (factorial growth)");
    if (k == 0) return 0.0;
    const double d = norm(a - b, NormKind::max());
    const double amax = norm(a, NormKind::max());
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return fact * k * d * std::pow(d + amax, k - 1);
}

std::vector<cplx> spectrum(const CMatrix& a) {
    require_square(a.rows(), a.cols(), "spectrum");
    require_finite(a, "spectrum");
    if (a.size() == 0) return {};
    const bool real = exactly_real(a);
    if (exactly_hermitian(a)) return real ? symmetric_spectrum(a.real()) : hermitian_spectrum(a);
    if (real) return real_general_spectrum(a.real());
    return complex_general_spectrum(a);
}

std::vector<cplx> spectrum(const Eigen::MatrixXd& a) {
    require_square(a.rows(), a.cols(), "spectrum");
    if (!a.allFinite()) throw std::invalid_argument("spectrum: non-finite entry");
    if (a.size() == 0) return {};
    if (a == a.transpose()) return symmetric_spectrum(a);
    return real_general_spectrum(a);
}

PencilSpectrum generalized_spectrum(const CMatrix& a, const CMatrix& b, double infinite_cutoff) {
    require_square(a.rows(), a.cols(), "generalized_spectrum");
    if (b.rows() != a.rows() || b.cols() != a.cols()) throw std::invalid_argument("generalized_spectrum: shape mismatch");
    require_finite(a, "generalized_spectrum");
    require_finite(b, "generalized_spectrum");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    PencilSpectrum out;
    if (n == 0) return out;
    CMatrix aa = a, bb = b;
    CVector alpha(n), beta(n);
    check_info(LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', n, aa.data(), n, bb.data(), n, alpha.data(), beta.data(),
                             nullptr, 1, nullptr, 1),
               "zggev");
    for (lapack_int i = 0; i < n; ++i) {
        if (beta[i] == cplx(0.0, 0.0)) {
            ++out.infinite;
            continue;
        }
        const cplx lambda = alpha[i] / beta[i];
        if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()) || std::abs(lambda) > infinite_cutoff) {
            ++out.infinite;
            continue;
        }
        out.finite.push_back(lambda);
    }
    return out;
}

std::vector<cplx> order_by_distance(std::vector<cplx> points, cplx z0) {
    auto angle = [z0](cplx p) {
        double t = std::arg(p - z0);
        if (t < 0.0) t += 2.0 * std::numbers::pi;
        return t;
    };
    std::stable_sort(points.begin(), points.end(), [&](cplx a, cplx b) {
        const double da = std::abs(a - z0);
        const double db = std::abs(b - z0);
        if (da != db) return da < db;
        return angle(a) < angle(b);
    });
    return points;
}

}  // namespace speclab

namespace speclab {

Tridiagonal tridiagonalize_fix_first(const Eigen::MatrixXd& w) {
    require_square(w.rows(), w.cols(), "tridiagonalize_fix_first");
    const lapack_int n = static_cast<lapack_int>(w.rows());
    Tridiagonal t{Eigen::VectorXd(n), Eigen::VectorXd(std::max<lapack_int>(n - 1, 0))};
    if (n == 0) return t;
    Eigen::MatrixXd a = w;
    Eigen::VectorXd tau(std::max<lapack_int>(n - 1, 1));
    // Lower storage: Q = H(1)...H(n-1) and every reflector fixes e_1.
    check_info(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, t.d.data(), t.e.data(), tau.data()), "dsytrd");
    return t;
}

std::vector<cplx> complex_symmetric_tridiagonal_eigenvalues(CVector d, CVector e) {
    const Eigen::Index n = d.size();
    if (n == 0) return {};
    if (e.size() != n - 1) throw std::invalid_argument("complex_symmetric_tridiagonal_eigenvalues: e needs n-1 entries");
    CVector off = CVector::Zero(n);
    off.head(n - 1) = e;
    constexpr double eps = 0x1.0p-52;
    constexpr int max_sweeps = 60;

    for (Eigen::Index l = 0; l < n; ++l) {
        int sweeps = 0;
        Eigen::Index m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(off[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (++sweeps > max_sweeps) throw NonConvergenceError("complex symmetric QL: too many sweeps");

            cplx g = (d[l + 1] - d[l]) / (2.0 * off[l]);
            cplx r = std::sqrt(g * g + 1.0);
            g = d[m] - d[l] + off[l] / (std::abs(g + r) >= std::abs(g - r) ? g + r : g - r);
            cplx s = 1.0, c = 1.0, p = 0.0;
            Eigen::Index i;
            for (i = m - 1; i >= l; --i) {
                const cplx f = s * off[i];
                const cplx b = c * off[i];
                r = std::sqrt(f * f + g * g);
                off[i + 1] = r;
                if (std::abs(r) <= 1e-8 * (std::abs(f) + std::abs(g))) {
                    // f^2 + g^2 ~ 0 with f, g not both small: an isotropic vector.
                    if (std::abs(f) + std::abs(g) == 0.0) {
                        d[i + 1] -= p;
                        off[m] = 0.0;
                        break;
                    }
                    throw NonConvergenceError("complex symmetric QL: isotropic breakdown");
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (i >= l && std::abs(r) == 0.0) continue;
            d[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        } while (m != l);
    }
    return {d.data(), d.data() + n};
}

BlockLanczos::BlockLanczos(const Eigen::MatrixXd& w, const Eigen::MatrixXd& start) : w_(w) {
    require_square(w.rows(), w.cols(), "BlockLanczos");
    if (start.rows() != w.rows() || start.cols() == 0) throw std::invalid_argument("BlockLanczos: bad start block");
    v_.resize(w.rows(), 0);
    wv_.resize(w.rows(), 0);
    append_orthonormal(start);
    if (v_.cols() == 0) throw std::invalid_argument("BlockLanczos: start block is zero");
}

void BlockLanczos::append_orthonormal(Eigen::MatrixXd block) {
    const Eigen::Index N = w_.rows();
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
        if (v_.cols() == N) break;
        Eigen::VectorXd x = block.col(j);
        const double before = x.norm();
        if (before == 0.0) continue;
        // Two passes of classical Gram-Schmidt keep the basis orthogonal to rounding.
        for (int pass = 0; pass < 2; ++pass) {
            if (v_.cols() > 0) x -= v_ * (v_.transpose() * x);
        }
        const double after = x.norm();
        if (after <= 1e-10 * before) continue;  // linearly dependent: deflate
        v_.conservativeResize(Eigen::NoChange, v_.cols() + 1);
        v_.col(v_.cols() - 1) = x / after;
    }
}

bool BlockLanczos::extend(int blocks) {
    for (int step = 0; step < blocks && !exhausted_; ++step) {
        const Eigen::Index cols = v_.cols();
        if (frontier_ == cols || cols == w_.rows()) {
            exhausted_ = true;
            break;
        }
        const Eigen::MatrixXd fresh = w_ * v_.middleCols(frontier_, cols - frontier_);
        wv_.conservativeResize(Eigen::NoChange, cols);
        wv_.middleCols(frontier_, cols - frontier_) = fresh;
        frontier_ = cols;
        append_orthonormal(fresh);
        if (v_.cols() == cols) exhausted_ = true;
    }
    return !exhausted_;
}

Eigen::MatrixXd BlockLanczos::projected() const {
    // Columns past the frontier have not been multiplied yet.
    Eigen::MatrixXd wv(w_.rows(), v_.cols());
    wv.leftCols(frontier_) = wv_.leftCols(frontier_);
    if (frontier_ < v_.cols()) wv.rightCols(v_.cols() - frontier_) = w_ * v_.rightCols(v_.cols() - frontier_);
    const Eigen::MatrixXd t = v_.transpose() * wv;
    return 0.5 * (t + t.transpose());
}

}  // namespace speclab
