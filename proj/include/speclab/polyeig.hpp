#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/matops.hpp"
#include "speclab/perturbation.hpp"
#include "speclab/scalar_poly.hpp"
#include "speclab/stieltjes.hpp"

namespace speclab {

/// spectrum(X + P C Q) for a model with constant C.
std::vector<cplx> spike_spectrum(const CMatrix& x, const PerturbationModel& model);

/// Eigenvalues of W + c e_1 e_1^T for real symmetric W: tridiagonalize with
/// e_1 fixed, then complex symmetric QL. Falls back to the dense solver if
/// the QL breaks down.
std::vector<cplx> corner_spike_spectrum(const Eigen::MatrixXd& w, cplx c);

/// Eigenvalues of X + P C Q nearest z0, from the projection onto a block
/// Krylov space of X started at span(P, Q^T). X real symmetric, P and Q real.
/// Non-real limit points of the projection converge to those of the full
/// matrix; the space grows until the k nearest eigenvalues move by less than
/// tol between checks or the space is exhausted.
struct KrylovSpikeResult {
    std::vector<cplx> nearest;  // k values, ordered by distance to z0
    Eigen::Index dim = 0;
    bool converged = false;
};

KrylovSpikeResult spike_nearest_krylov(const Eigen::MatrixXd& x, const PerturbationModel& model, cplx z0, int k,
                                       double tol = 1e-10, int blocks_per_check = 5);

/// Spectrum of H X with H = diag(c_1..c_n) + I. Any nonzero c_j is accepted
/// here; only the limit-point formulas need c_j < 0. With verify set, the
/// eigenvalues of the pencil X - z I + z P C Q, C = diag(1 - 1/c_j), are
/// computed as well and their distance to the direct spectrum is recorded.
struct HxSpectrum {
    std::vector<cplx> eigenvalues;
    double pencil_discrepancy = -1.0;  // < 0: not verified
};

HxSpectrum hx_spectrum(const std::vector<double>& c, const CMatrix& x, bool verify = false);

/// Largest matched distance between two eigenvalue multisets (greedy).
double multiset_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

/// X - p(z) I + q(z) u u^*.
struct QuadraticScenario {
    ScalarPoly p;
    ScalarPoly q;
    CVector u;
    LimitLaw law = LimitLaw::wigner();
    std::optional<double> zeta;
    int max_support = 8;  // nonzeros allowed in u

    void validate() const;
};

/// The leading coefficient -p_d I + q_d u u^* is singular.
class PolynomialDegeneracyError : public std::runtime_error {
public:
    PolynomialDegeneracyError(const std::string& what, int rank_defect)
        : std::runtime_error(what), rank_defect_(rank_defect) {}
    int rank_defect() const noexcept { return rank_defect_; }

private:
    int rank_defect_;
};

struct QuadraticSpectrum {
    std::vector<cplx> finite;
    int discarded = 0;  // |lambda| > 1e8
};

/// Finite eigenvalues of the matrix polynomial by the first companion form,
/// reduced to a standard problem with the (invertible) leading coefficient.
QuadraticSpectrum quadratic_spectrum(const QuadraticScenario& scn, const CMatrix& x);

/// 1 + q(z) u^* (X - p(z) I)^{-1} u. Its zeros are the eigenvalues with
/// p(z) outside the spectrum of X.
cplx secular_check(const QuadraticScenario& scn, const CMatrix& x, cplx z);

/// Acoustic model: p = 4 pi^2 z^2 - 2, q = 2 pi^2 z^2 + (2 pi i / zeta) z - 1, u = e_N.
QuadraticScenario acoustic_scenario(int N, double zeta = 1.0);

}  // namespace speclab
