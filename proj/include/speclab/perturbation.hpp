#pragma once

#include <vector>

#include "speclab/jordan.hpp"
#include "speclab/matops.hpp"
#include "speclab/stieltjes.hpp"

namespace speclab {

/// C(z) = sum_i coeffs[i] z^i, all n x n.
class MatrixPoly {
public:
    explicit MatrixPoly(std::vector<CMatrix> coeffs);
    static MatrixPoly constant(const CMatrix& c) { return MatrixPoly({c}); }

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    Eigen::Index size() const noexcept { return coeffs_.front().rows(); }
    const std::vector<CMatrix>& coeffs() const noexcept { return coeffs_; }

    /// Horner evaluation.
    CMatrix operator()(cplx z) const;

private:
    std::vector<CMatrix> coeffs_;
};

/// A_N(z) = P C(z) Q with P of size N x n and Q of size n x N.
class PerturbationModel {
public:
    PerturbationModel(CMatrix p, MatrixPoly c, CMatrix q);

    /// P = [e_{rows[0]}, ...], Q = [e_{cols[0]}, ...]^T. The usual models put
    /// the perturbation on a few coordinates.
    static PerturbationModel coordinate(int N, const std::vector<int>& rows, const std::vector<int>& cols, MatrixPoly c);

    Eigen::Index N() const noexcept { return p_.rows(); }
    Eigen::Index n() const noexcept { return p_.cols(); }
    const CMatrix& P() const noexcept { return p_; }
    const CMatrix& Q() const noexcept { return q_; }
    const MatrixPoly& C() const noexcept { return c_; }
    const CMatrix& QP() const noexcept { return qp_; }

    /// Recorded size data of the factors.
    double norm_P() const noexcept { return norm_p_; }
    double norm_Q() const noexcept { return norm_q_; }
    int c_of_P() const noexcept { return c_p_; }
    int r_of_Q() const noexcept { return r_q_; }

    /// n <= log N; only advisory for a growing perturbation rank.
    bool rank_advisory_ok() const;

    /// The same model with N replaced; only for coordinate models.
    PerturbationModel resized(int N) const;

private:
    CMatrix p_;
    MatrixPoly c_;
    CMatrix q_;
    CMatrix qp_;
    double norm_p_ = 0.0;
    double norm_q_ = 0.0;
    int c_p_ = 0;
    int r_q_ = 0;
    std::vector<int> coord_rows_;
    std::vector<int> coord_cols_;
};

/// P C(z) Q as a dense N x N matrix.
CMatrix eval_perturbation(const PerturbationModel& model, cplx z);

/// C(z)^{-1}, refusing a singular C(z).
CMatrix c_inverse(const PerturbationModel& model, cplx z);

/// K(z) = C(z)^{-1} + m(z) Q P.
CMatrix K_of_z(const PerturbationModel& model, const LimitLaw& law, cplx z,
               BoundaryMode mode = BoundaryMode::Strict);

/// L(z) = C(z)^{-1} + Q Xres P with Xres = X(z)^{-1} supplied by the caller.
CMatrix L_of_z(const PerturbationModel& model, const CMatrix& xres, cplx z);

/// M~(z) = m(z) I - m(z)^2 P K(z)^{-1} Q. Throws SingularMatrixError at
/// zeros of det K.
CMatrix limit_resolvent(const PerturbationModel& model, const LimitLaw& law, cplx z);

struct DeformedWindowParams {
    enum class Base { SpectralWindow, Rectangle };
    /// Exponent used by the eigenvalue form: beta*omega (S) or beta (T).
    enum class Variant { S, T };

    double beta = 0.45;
    double omega = 0.9;
    Base base = Base::SpectralWindow;
    double re_min = -1.0, re_max = 1.0, im_min = 1.0, im_max = 2.0;  // Rectangle only
    Variant variant = Variant::S;

    void validate() const;
};

/// z in the base set, K(z) invertible and ||K(z)^{-1}||_2 < N^beta.
bool in_deformed_window(const PerturbationModel& model, const LimitLaw& law, cplx z, const DeformedWindowParams& params,
                        int N);

/// z in the base set and min over xi of |1 + xi m(z)|^{p_xi} >= N^{-e},
/// e = beta*omega or beta per the variant.
bool in_deformed_window(const JordanSpec& jordan, const LimitLaw& law, cplx z, const DeformedWindowParams& params,
                        int N);

/// ||(X(z) + A(z))^{-1} - M~(z)||_max with the inverse taken by the Woodbury
/// route: X(z) = input - A(z) is inverted and then updated.
double resolvent_error(const CMatrix& xz_plus_a, const PerturbationModel& model, const LimitLaw& law, cplx z);

/// Same error from X(z)^{-1} directly.
double resolvent_error_from_inverse(const CMatrix& xinv, const PerturbationModel& model, const LimitLaw& law, cplx z);

}  // namespace speclab
