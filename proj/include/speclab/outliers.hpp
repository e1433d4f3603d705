#pragma once

#include <optional>
#include <vector>

#include "speclab/jordan.hpp"
#include "speclab/matops.hpp"
#include "speclab/scalar_poly.hpp"
#include "speclab/stieltjes.hpp"

namespace speclab {

enum class OutlierSource { MatrixSpike, HXProduct, PortHamiltonian, QuadraticScalar };

struct OutlierPrediction {
    cplx z0;
    int multiplicity = 1;
    double rate_exponent = -0.5;  // -1/(2 p_xi)
    OutlierSource source = OutlierSource::MatrixSpike;
    bool degenerate = false;      // limit point on the closure of the bulk
};

struct SpikeSolution {
    cplx z0;
    bool degenerate = false;
};

/// Solves 1 + xi m_W(z) = 0: z0 = xi + 1/xi when |xi| > 1, the boundary
/// point 2 Re xi (degenerate) when |xi| = 1, nothing when |xi| < 1.
std::optional<SpikeSolution> wigner_spike_outlier(cplx xi);

/// Solves 1 + xi m_MP(z) = 0 by inverting the self-consistent equation and
/// keeping the candidate only if it is off the bulk and on the right branch.
std::optional<cplx> mp_spike_outlier(cplx xi, const LimitLaw& law);

struct SpikePredictions {
    std::vector<OutlierPrediction> predictions;
    std::vector<cplx> omitted;  // eigenvalues of D without an off-bulk solution
};

SpikePredictions matrix_spike_predictions(const JordanSpec& jordan, const LimitLaw& law);

/// Non-real limit points of H X with H = diag(c) + I. Wigner: the pair
/// +-c i / sqrt(1 - c); Marchenko-Pastur: the root of c/((c-1) z) + m(z) = 0
/// solved from the self-consistent equation. Repeated c_j are merged.
std::vector<OutlierPrediction> hx_outliers(const std::vector<double>& c, const LimitLaw& law);

/// Closed-form Marchenko-Pastur limit point for one c < 0, transcribed from
/// the literature formula in gamma_+-, phi. Used to cross-check hx_outliers.
cplx hx_mp_closed_form(double c, const LimitLaw& law);

/// Residual of c/((c-1) z) + m(z).
cplx hx_residual(double c, const LimitLaw& law, cplx z);

/// z_j = -t_j^2 / (1 + i t_j) for A - Z with A = diag(i t) + 0 and square
/// Marchenko-Pastur Z. Repeated t_j are merged.
std::vector<OutlierPrediction> port_hamiltonian_outliers(const std::vector<double>& t);

struct Rectangle {
    double re_min, re_max, im_min, im_max;
};

struct QuadraticRootOptions {
    double grid_step = 0.02;
    double newton_tol = 1e-12;
    int newton_max_iter = 100;
    double accept_tol = 1e-10;
    double winding_radius = 1e-3;
    BoundaryMode mode = BoundaryMode::Strict;
};

/// f(z) = m(p(z)) + 1/q(z).
cplx quadratic_secular(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law, cplx z,
                       BoundaryMode mode = BoundaryMode::Strict);

/// Roots of f in the rectangle: grid seeding, Newton refinement, acceptance
/// at |f| < accept_tol and multiplicity from the winding number. Roots with
/// p(z0) on the closed bulk are flagged degenerate. In Strict mode a region
/// that reaches p^{-1}(bulk) is refused with std::domain_error.
std::vector<OutlierPrediction> quadratic_outliers(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law,
                                                  const Rectangle& region, const QuadraticRootOptions& opts = {});

/// Number of points with |lambda - z0| <= radius.
int count_near(const std::vector<cplx>& spectrum, cplx z0, double radius);

/// Eigenvalues of D grouped by distance <= tol (single linkage). A cluster of
/// size > 1 is where Jordan structure has to come from the caller.
struct EigenCluster {
    cplx center;
    std::vector<cplx> members;
};

std::vector<EigenCluster> spectrum_clusters(const CMatrix& d, double tol = 1e-6);

}  // namespace speclab
