#pragma once

#include <complex>

namespace speclab {

using cplx = std::complex<double>;

/// Which isotropic resolvent law applies to the unperturbed ensemble.
enum class LawKind { Wigner, MarchenkoPastur };

/// How real arguments inside the open bulk are treated.
///
/// `Strict` rejects them. `LimitFromAbove` returns lim_{y↓0} m(x + iy), the
/// convention needed when a spike sits exactly on the bulk boundary.
enum class BoundaryMode { Strict, LimitFromAbove };

/// Limit law of X_N - zI: semicircle on [-2, 2] or Marchenko–Pastur with
/// aspect ratio phi = M/N, supported on [gamma_minus, gamma_plus].
class LimitLaw {
public:
    static LimitLaw wigner();
    static LimitLaw marchenko_pastur(double phi);

    LawKind kind() const noexcept { return kind_; }
    double phi() const noexcept { return phi_; }
    double gamma_minus() const noexcept { return gamma_minus_; }
    double gamma_plus() const noexcept { return gamma_plus_; }

    /// Lower/upper edge of the continuous part of the spectrum.
    double bulk_left() const noexcept;
    double bulk_right() const noexcept;

private:
    LimitLaw(LawKind kind, double phi);

    LawKind kind_;
    double phi_;
    double gamma_minus_;
    double gamma_plus_;
};

struct WindowParams {
    double omega = 0.9;
    int N = 1;
    double beta = 0.45;

    void validate() const;
};

/// Stieltjes transform of the semicircle law, m^2 + z m + 1 = 0 with
/// Im m > 0 in the upper half-plane.
cplx m_wigner(cplx z, BoundaryMode mode = BoundaryMode::Strict);

/// Stieltjes transform of the Marchenko–Pastur law for X = Y*Y with
/// E|Y_ij|^2 = 1/sqrt(NM). For phi < 1 it carries the atom (1 - phi) at 0.
cplx m_mp(cplx z, const LimitLaw& law, BoundaryMode mode = BoundaryMode::Strict);

/// Dispatches on the law kind.
cplx m_law(cplx z, const LimitLaw& law, BoundaryMode mode = BoundaryMode::Strict);

/// dm/dz from the self-consistent equation. Same domain as m_law.
cplx m_law_derivative(cplx z, const LimitLaw& law, BoundaryMode mode = BoundaryMode::Strict);

/// z * m_MP(1/z): limit law of (z Y*Y - I)^{-1}. Window gating is the
/// caller's job.
cplx m_reciprocal_variant(cplx z, const LimitLaw& law, BoundaryMode mode = BoundaryMode::Strict);

/// sqrt(Im m(z) / (N y)) + 1/(N y), y = Im z > 0.
double rate_psi(const LimitLaw& law, cplx z, int N);

/// Membership in the spectral window S_{N,omega} of the given law.
bool in_spectral_window(const LimitLaw& law, cplx z, const WindowParams& params);

}  // namespace speclab
