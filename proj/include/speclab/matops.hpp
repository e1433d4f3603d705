#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace speclab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when a matrix that must be inverted is numerically singular.
/// Carries the reciprocal 2-norm condition number that triggered it.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double rcond) : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// LAPACK reported that the QR iteration did not converge.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Lp { One, Two, Inf };

/// Operator norms ||A||_{p,q} = sup ||Ax||_q / ||x||_p, plus the max-entry norm.
struct NormKind {
    enum class Tag { Max, OneToOne, InfToInf, Spectral, Mixed } tag = Tag::Max;
    Lp p = Lp::One;
    Lp q = Lp::Inf;

    static NormKind max() { return {Tag::Max}; }
    static NormKind one() { return {Tag::OneToOne}; }
    static NormKind inf() { return {Tag::InfToInf}; }
    static NormKind spectral() { return {Tag::Spectral}; }
    /// Only (1,inf), (2,inf) and (1,2) are supported.
    static NormKind mixed(Lp p, Lp q) { return {Tag::Mixed, p, q}; }
};

double norm(const CMatrix& a, NormKind kind);

struct SparsityCounts {
    int rows = 0;  // max nonzeros in a row
    int cols = 0;  // max nonzeros in a column
};

/// Exact-zero test, no tolerance.
SparsityCounts sparsity_counts(const CMatrix& a);

/// Upper bounds on kappa_1(Q), kappa_inf(P) and kappa(P, Q):
/// n r(Q) ||Q||_max, n c(P) ||P||_max and n r(Q) c(P) ||Q||_max ||P||_max.
struct KappaBounds {
    double k1 = 0.0;
    double kinf = 0.0;
    double kpq = 0.0;
};

KappaBounds kappa_bounds(const CMatrix& p, const CMatrix& q);

/// Reciprocal 2-norm condition number below which a small inverse is refused.
inline constexpr double kSingularRcond = 1e-13;

/// Inverse of a small square matrix. Throws SingularMatrixError when the
/// reciprocal condition number is below kSingularRcond.
CMatrix checked_inverse(const CMatrix& a, const char* what = "matrix");

/// Reciprocal 2-norm condition number via SVD (0 for singular input).
double rcond_2norm(const CMatrix& a);

/// (X + P C Q)^{-1} from X^{-1} and C^{-1}:
/// Xinv - Xinv P L^{-1} Q Xinv with L = Cinv + Q Xinv P.
/// Throws SingularMatrixError if L is numerically singular.
CMatrix woodbury_inverse(const CMatrix& xinv, const CMatrix& p, const CMatrix& cinv, const CMatrix& q);

/// k! k ||A-B||_max (||A-B||_max + ||A||_max)^{k-1}; bounds |det A - det B|.
/// Refuses k > 8.
double det_diff_bound(const CMatrix& a, const CMatrix& b);

/// All eigenvalues of a dense square matrix. Exactly Hermitian input goes to
/// the Hermitian solver, real input to the real one.
std::vector<cplx> spectrum(const CMatrix& a);
std::vector<cplx> spectrum(const Eigen::MatrixXd& a);

/// Eigenvalues of the pencil (A, B): lambda with det(A - lambda B) = 0.
struct PencilSpectrum {
    std::vector<cplx> finite;
    int infinite = 0;  // |beta| tiny or |lambda| above the cutoff
};

PencilSpectrum generalized_spectrum(const CMatrix& a, const CMatrix& b, double infinite_cutoff = 1e8);

/// Stable sort by |lambda - z0|; exact ties ordered by arg(lambda - z0) in [0, 2pi).
std::vector<cplx> order_by_distance(std::vector<cplx> points, cplx z0);

// Structured routes used by the large-N sweeps. Each one is checked against
// spectrum() in the tests.

/// Symmetric tridiagonal T = Q^T W Q with Q e_1 = e_1. d has N entries, e has N-1.
struct Tridiagonal {
    Eigen::VectorXd d;
    Eigen::VectorXd e;
};

Tridiagonal tridiagonalize_fix_first(const Eigen::MatrixXd& w);

/// Eigenvalues of the complex symmetric (not Hermitian) tridiagonal matrix with
/// diagonal d and off-diagonal e, by implicit QL with complex orthogonal
/// rotations. Throws NonConvergenceError on breakdown or after 60 sweeps per
/// eigenvalue.
std::vector<cplx> complex_symmetric_tridiagonal_eigenvalues(CVector d, CVector e);

/// Block Lanczos on a real symmetric matrix with full reorthogonalization.
/// The basis is orthonormal and its first columns span the start block.
class BlockLanczos {
public:
    BlockLanczos(const Eigen::MatrixXd& w, const Eigen::MatrixXd& start);

    /// Adds up to `blocks` block steps. Returns false once the Krylov space is
    /// invariant or fills the whole space.
    bool extend(int blocks);

    bool exhausted() const noexcept { return exhausted_; }
    Eigen::Index dim() const noexcept { return v_.cols(); }
    const Eigen::MatrixXd& basis() const noexcept { return v_; }

    /// Rayleigh quotient V^T W V, symmetrized.
    Eigen::MatrixXd projected() const;

private:
    void append_orthonormal(Eigen::MatrixXd block);

    const Eigen::MatrixXd& w_;
    Eigen::MatrixXd v_;
    Eigen::MatrixXd wv_;
    Eigen::Index frontier_ = 0;  // first basis column not yet multiplied by W
    bool exhausted_ = false;
};

}  // namespace speclab
