#include "speclab/stieltjes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace speclab {

namespace {

// Product of principal roots: analytic off [a, b], behaves like z at infinity.
cplx edge_root(cplx z, double a, double b) { return std::sqrt(z - a) * std::sqrt(z - b); }

cplx canonical_real(cplx z) {
    // A real argument is read as the limit from the upper half-plane.
    if (z.imag() == 0.0) return {z.real(), 0.0};
    return z;
}

void check_bulk(cplx z, double left, double right, BoundaryMode mode, const char* who) {
    if (z.imag() != 0.0 || mode == BoundaryMode::LimitFromAbove) return;
    const double x = z.real();
    if (x > left && x < right) {
        throw std::domain_error(std::string(who) + ": real argument " + std::to_string(x) +
                                " lies inside the open bulk");
    }
}

}  // namespace

LimitLaw::LimitLaw(LawKind kind, double phi) : kind_(kind), phi_(phi) {
    if (kind == LawKind::MarchenkoPastur) {
        if (!(phi > 0.0) || !std::isfinite(phi)) {
            throw std::invalid_argument("Marchenko-Pastur law needs phi > 0");
        }
        const double r = std::sqrt(phi);
        gamma_minus_ = r + 1.0 / r - 2.0;
        gamma_plus_ = r + 1.0 / r + 2.0;
        // r + 1/r - 2 = (sqrt(r) - 1/sqrt(r))^2 can come out as -1e-17.
        if (gamma_minus_ < 0.0) gamma_minus_ = 0.0;
    } else {
        gamma_minus_ = -2.0;
        gamma_plus_ = 2.0;
    }
}

LimitLaw LimitLaw::wigner() { return LimitLaw(LawKind::Wigner, 1.0); }

LimitLaw LimitLaw::marchenko_pastur(double phi) { return LimitLaw(LawKind::MarchenkoPastur, phi); }

double LimitLaw::bulk_left() const noexcept { return gamma_minus_; }
double LimitLaw::bulk_right() const noexcept { return gamma_plus_; }

void WindowParams::validate() const {
    if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("window omega must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("window beta must lie in (0, 1/2)");
    if (N < 1) throw std::invalid_argument("window N must be positive");
}

cplx m_wigner(cplx z, BoundaryMode mode) {
    z = canonical_real(z);
    check_bulk(z, -2.0, 2.0, mode, "m_wigner");
    return 0.5 * (-z + edge_root(z, 2.0, -2.0));
}

cplx m_mp(cplx z, const LimitLaw& law, BoundaryMode mode) {
    if (law.kind() != LawKind::MarchenkoPastur) throw std::invalid_argument("m_mp needs a Marchenko-Pastur law");
    z = canonical_real(z);
    if (z == cplx(0.0, 0.0)) throw std::domain_error("m_mp: z = 0 is outside the domain");
    check_bulk(z, law.gamma_minus(), law.gamma_plus(), mode, "m_mp");
    const double r = std::sqrt(law.phi());
    const cplx root = edge_root(z, law.gamma_minus(), law.gamma_plus());
    return (r - 1.0 / r - z + root) / (2.0 * z / r);
}

cplx m_law(cplx z, const LimitLaw& law, BoundaryMode mode) {
    return law.kind() == LawKind::Wigner ? m_wigner(z, mode) : m_mp(z, law, mode);
}

cplx m_law_derivative(cplx z, const LimitLaw& law, BoundaryMode mode) {
    const cplx m = m_law(z, law, mode);
    if (law.kind() == LawKind::Wigner) return -m / (2.0 * m + z);
    // z m^2/r + z m - a m + 1 = 0 with r = sqrt(phi), a = r - 1/r.
    const double r = std::sqrt(law.phi());
    const double a = r - 1.0 / r;
    return -(m * m / r + m) / (2.0 * z * m / r + z - a);
}

cplx m_reciprocal_variant(cplx z, const LimitLaw& law, BoundaryMode mode) {
    if (z == cplx(0.0, 0.0)) throw std::domain_error("m_reciprocal_variant: z = 0 is outside the domain");
    return z * m_mp(1.0 / z, law, mode);
}

double rate_psi(const LimitLaw& law, cplx z, int N) {
    const double y = z.imag();
    if (!(y > 0.0)) throw std::domain_error("rate_psi needs Im z > 0");
    if (N < 1) throw std::invalid_argument("rate_psi needs N >= 1");
    const double ny = static_cast<double>(N) * y;
    return std::sqrt(m_law(z, law).imag() / ny) + 1.0 / ny;
}

bool in_spectral_window(const LimitLaw& law, cplx z, const WindowParams& params) {
    params.validate();
    const double x = z.real();
    const double y = z.imag();
    const double inv_omega = 1.0 / params.omega;
    if (law.kind() == LawKind::Wigner) {
        const double floor_y = std::pow(static_cast<double>(params.N), -1.0 + params.omega);
        return std::abs(x) <= inv_omega && y >= floor_y && y <= inv_omega;
    }
    const double M = std::round(law.phi() * params.N);
    const double K = std::min(static_cast<double>(params.N), std::max(M, 1.0));
    const double kappa = std::min(std::abs(law.gamma_minus() - x), std::abs(law.gamma_plus() - x));
    const double floor_y = std::pow(K, -1.0 + params.omega);
    return kappa <= inv_omega && y >= floor_y && y <= inv_omega && std::abs(z) >= params.omega;
}

}  // namespace speclab
