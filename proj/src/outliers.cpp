#include "speclab/outliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace speclab {

namespace {

const cplx I{0.0, 1.0};

bool in_closed_bulk(const LimitLaw& law, cplx x, double tol) {
    return std::abs(x.imag()) <= tol * (1.0 + std::abs(x)) && x.real() >= law.bulk_left() - tol &&
           x.real() <= law.bulk_right() + tol;
}

bool in_open_bulk(const LimitLaw& law, cplx x) {
    return x.imag() == 0.0 && x.real() > law.bulk_left() && x.real() < law.bulk_right();
}

// Distinct values in order of first appearance with their repetition counts.
template <typename T>
std::vector<std::pair<T, int>> group_equal(const std::vector<T>& values) {
    std::vector<std::pair<T, int>> out;
    for (const T& v : values) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == v; });
        if (it == out.end())
            out.emplace_back(v, 1);
        else
            ++it->second;
    }
    return out;
}

}  // namespace

std::optional<SpikeSolution> wigner_spike_outlier(cplx xi) {
    if (xi == cplx(0.0, 0.0)) throw std::invalid_argument("wigner_spike_outlier: xi = 0");
    const double r = std::abs(xi);
    // |m_W| < 1 off the bulk, and m = -1/xi.
    if (r == 1.0) return SpikeSolution{2.0 * xi.real(), true};
    if (r < 1.0) return std::nullopt;
    return SpikeSolution{xi + 1.0 / xi, false};
}

std::optional<cplx> mp_spike_outlier(cplx xi, const LimitLaw& law) {
    if (xi == cplx(0.0, 0.0)) throw std::invalid_argument("mp_spike_outlier: xi = 0");
    if (law.kind() != LawKind::MarchenkoPastur) throw std::invalid_argument("mp_spike_outlier needs a Marchenko-Pastur law");
    const double r = std::sqrt(law.phi());
    const double a = r - 1.0 / r;
    const cplx m = -1.0 / xi;
    // z m^2/r + z m - a m + 1 = 0 is linear in z.
    const cplx denom = m * (1.0 + m / r);
    if (std::abs(denom) == 0.0) return std::nullopt;
    cplx z = (a * m - 1.0) / denom;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z == cplx(0.0, 0.0)) return std::nullopt;
    if (in_closed_bulk(law, z, 1e-12)) return std::nullopt;
    if (std::abs(z.imag()) <= 1e-14 * std::abs(z)) z.imag(0.0);
    const cplx check = m_mp(z, law);
    if (std::abs(check - m) > 1e-10 * std::max(1.0, std::abs(m))) return std::nullopt;  // other branch
    return z;
}

SpikePredictions matrix_spike_predictions(const JordanSpec& jordan, const LimitLaw& law) {
    jordan.validate();
    SpikePredictions out;
    for (const auto& e : jordan.entries) {
        OutlierPrediction pred;
        pred.multiplicity = e.k();
        pred.rate_exponent = -1.0 / (2.0 * e.p());
        pred.source = OutlierSource::MatrixSpike;
        // 1 + 0 m(z) never vanishes: a nilpotent part of D moves no eigenvalue.
        if (e.xi == cplx(0.0, 0.0)) {
            out.omitted.push_back(e.xi);
            continue;
        }
        if (law.kind() == LawKind::Wigner) {
            const auto s = wigner_spike_outlier(e.xi);
            if (!s) {
                out.omitted.push_back(e.xi);
                continue;
            }
            pred.z0 = s->z0;
            pred.degenerate = s->degenerate;
        } else {
            const auto z = mp_spike_outlier(e.xi, law);
            if (!z) {
                out.omitted.push_back(e.xi);
                continue;
            }
            pred.z0 = *z;
        }
        out.predictions.push_back(pred);
    }
    return out;
}

cplx hx_residual(double c, const LimitLaw& law, cplx z) { return c / ((c - 1.0) * z) + m_law(z, law); }

cplx hx_mp_closed_form(double c, const LimitLaw& law) {
    const double r = std::sqrt(law.phi());
    const double gm = law.gamma_minus();
    const double gp = law.gamma_plus();
    const double s = 2.0 * c / r + (c - 1.0) * (r - 1.0 / r);
    const double num = -(c - 1.0) * (c - 1.0) * gm * gp + s * s;
    const double den = 2.0 * s * (c - 1.0) - (c - 1.0) * (c - 1.0) * (gp + gm);
    return num / den;
}

std::vector<OutlierPrediction> hx_outliers(const std::vector<double>& c, const LimitLaw& law) {
    for (double cj : c)
        if (!(cj < 0.0)) throw std::invalid_argument("hx_outliers: every c_j must be negative");
    std::vector<OutlierPrediction> out;
    for (const auto& [cj, k] : group_equal(c)) {
        OutlierPrediction pred;
        pred.multiplicity = k;
        pred.rate_exponent = -0.5;
        pred.source = OutlierSource::HXProduct;
        if (law.kind() == LawKind::Wigner) {
            const cplx z = -cj / std::sqrt(1.0 - cj) * I;
            for (cplx zz : {z, std::conj(z)}) {
                if (std::abs(hx_residual(cj, law, zz)) > 1e-12) throw std::logic_error("hx_outliers: residual check failed");
                pred.z0 = zz;
                out.push_back(pred);
            }
            continue;
        }
        // m = kappa / z turns z m^2/r + z m - a m + 1 = 0 into a linear equation.
        const double r = std::sqrt(law.phi());
        const double a = r - 1.0 / r;
        const double kappa = -cj / (cj - 1.0);
        const double z = (1.0 - cj) * (a * kappa - kappa * kappa / r);
        if (z == 0.0 || in_closed_bulk(law, z, 1e-12)) continue;
        if (std::abs(hx_residual(cj, law, z)) > 1e-10) continue;  // wrong branch: no limit point
        pred.z0 = z;
        out.push_back(pred);
    }
    return out;
}

std::vector<OutlierPrediction> port_hamiltonian_outliers(const std::vector<double>& t) {
    for (double tj : t)
        if (tj == 0.0 || !std::isfinite(tj)) throw std::invalid_argument("port_hamiltonian_outliers: t_j must be nonzero");
    const auto law = LimitLaw::marchenko_pastur(1.0);
    std::vector<OutlierPrediction> out;
    for (const auto& [tj, k] : group_equal(t)) {
        OutlierPrediction pred;
        pred.z0 = -tj * tj / (1.0 + I * tj);
        pred.multiplicity = k;
        pred.rate_exponent = -0.5;
        pred.source = OutlierSource::PortHamiltonian;
        // -z0 solves 1 - i t m(z) = 0 for the square law.
        if (std::abs(1.0 - I * tj * m_mp(-pred.z0, law)) > 1e-12) throw std::logic_error("port-Hamiltonian residual check failed");
        out.push_back(pred);
    }
    return out;
}

cplx quadratic_secular(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law, cplx z, BoundaryMode mode) {
    return m_law(p(z), law, mode) + 1.0 / q(z);
}

namespace {

cplx secular_derivative(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law, cplx z, BoundaryMode mode) {
    const cplx qz = q(z);
    return m_law_derivative(p(z), law, mode) * p.derivative(z) - q.derivative(z) / (qz * qz);
}

// f with the bulk and the poles of 1/q mapped to +inf; the grid scan only ranks.
double safe_abs_f(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law, cplx z, BoundaryMode mode) {
    const cplx qz = q(z);
    const cplx pz = p(z);
    if (qz == cplx(0.0, 0.0)) return std::numeric_limits<double>::infinity();
    if (law.kind() == LawKind::MarchenkoPastur && pz == cplx(0.0, 0.0)) return std::numeric_limits<double>::infinity();
    if (mode == BoundaryMode::Strict && in_open_bulk(law, pz)) return std::numeric_limits<double>::infinity();
    const double v = std::abs(quadratic_secular(p, q, law, z, mode));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

int winding_number(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law, cplx z0, double radius,
                   BoundaryMode mode) {
    constexpr int samples = 256;
    double total = 0.0;
    cplx prev = quadratic_secular(p, q, law, z0 + radius, mode);
    for (int k = 1; k <= samples; ++k) {
        const cplx z = z0 + std::polar(radius, 2.0 * std::numbers::pi * k / samples);
        const cplx cur = quadratic_secular(p, q, law, z, mode);
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

std::vector<OutlierPrediction> quadratic_outliers(const ScalarPoly& p, const ScalarPoly& q, const LimitLaw& law,
                                                  const Rectangle& region, const QuadraticRootOptions& opts) {
    if (p.is_zero() || q.is_zero()) throw std::invalid_argument("quadratic_outliers: p and q must be nonzero");
    if (!(region.re_min <= region.re_max && region.im_min <= region.im_max)) {
        throw std::invalid_argument("quadratic_outliers: empty region");
    }
    if (!(opts.grid_step > 0.0)) throw std::invalid_argument("quadratic_outliers: grid step must be positive");
    const double h = opts.grid_step;
    const int nx = static_cast<int>(std::floor((region.re_max - region.re_min) / h + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor((region.im_max - region.im_min) / h + 1e-9)) + 1;
    auto node = [&](int i, int j) { return cplx(region.re_min + i * h, region.im_min + j * h); };

    std::vector<double> grid(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const cplx z = node(i, j);
            if (opts.mode == BoundaryMode::Strict) {
                // Any node within one cell of p^{-1}(bulk), to second order in h.
                const cplx pz = p(z);
                const double re = std::clamp(pz.real(), law.bulk_left(), law.bulk_right());
                const double dist = std::abs(pz - cplx(re, 0.0));
                const double margin = 1.5 * h * std::abs(p.derivative(z)) + h * h * std::abs(p.second_derivative(z));
                if (dist <= margin) throw std::domain_error("quadratic_outliers: region reaches the preimage of the bulk");
            }
            grid[static_cast<std::size_t>(i) * ny + j] = safe_abs_f(p, q, law, z, opts.mode);
        }
    }

    std::vector<cplx> roots;
    const double slack = 2.0 * h;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const double v = grid[static_cast<std::size_t>(i) * ny + j];
            if (!std::isfinite(v)) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= nx || b >= ny) continue;
                    if (grid[static_cast<std::size_t>(a) * ny + b] < v) {
                        is_min = false;
                        break;
                    }
                }
            if (!is_min) continue;

            cplx z = node(i, j);
            bool ok = false;
            for (int it = 0; it < opts.newton_max_iter; ++it) {
                const cplx f = quadratic_secular(p, q, law, z, opts.mode);
                if (!std::isfinite(std::abs(f))) break;
                if (std::abs(f) < opts.newton_tol) {
                    // |z - z0| ~ |f|/|f'|, and f' is small far from the bulk: polish.
                    double fz = std::abs(f);
                    for (int k = 0; k < 3; ++k) {
                        const cplx df = secular_derivative(p, q, law, z, opts.mode);
                        if (!std::isfinite(std::abs(df)) || df == cplx(0.0, 0.0)) break;
                        const cplx zn = z - quadratic_secular(p, q, law, z, opts.mode) / df;
                        const double fn = std::abs(quadratic_secular(p, q, law, zn, opts.mode));
                        if (!(fn <= fz)) break;
                        z = zn;
                        fz = fn;
                    }
                    ok = true;
                    break;
                }
                const cplx df = secular_derivative(p, q, law, z, opts.mode);
                if (!std::isfinite(std::abs(df)) || df == cplx(0.0, 0.0)) break;
                const cplx step = f / df;
                z -= step;
                if (z.real() < region.re_min - slack || z.real() > region.re_max + slack ||
                    z.imag() < region.im_min - slack || z.imag() > region.im_max + slack)
                    break;
                if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) {
                    ok = true;
                    break;
                }
            }
            if (!ok) continue;
            if (z.real() < region.re_min || z.real() > region.re_max || z.imag() < region.im_min ||
                z.imag() > region.im_max)
                continue;
            if (!(std::abs(quadratic_secular(p, q, law, z, opts.mode)) < opts.accept_tol)) continue;
            const bool dup = std::any_of(roots.begin(), roots.end(), [&](cplx r) { return std::abs(r - z) < 1e-7; });
            if (!dup) roots.push_back(z);
        }
    }

    std::vector<OutlierPrediction> out;
    for (cplx z : roots) {
        OutlierPrediction pred;
        pred.z0 = z;
        pred.source = OutlierSource::QuadraticScalar;
        pred.degenerate = in_closed_bulk(law, p(z), 1e-9);
        const int w = pred.degenerate ? 1 : winding_number(p, q, law, z, opts.winding_radius, opts.mode);
        pred.multiplicity = std::max(1, w);
        pred.rate_exponent = -1.0 / (2.0 * pred.multiplicity);
        out.push_back(pred);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.z0.real() != b.z0.real() ? a.z0.real() < b.z0.real() : a.z0.imag() < b.z0.imag();
    });
    return out;
}

int count_near(const std::vector<cplx>& spectrum, cplx z0, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("count_near: radius must be positive");
    return static_cast<int>(
        std::count_if(spectrum.begin(), spectrum.end(), [&](cplx l) { return std::abs(l - z0) <= radius; }));
}

std::vector<EigenCluster> spectrum_clusters(const CMatrix& d, double tol) {
    const auto ev = spectrum(d);
    const std::size_t n = ev.size();
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(ev[i] - ev[j]) <= tol) parent[find(i)] = find(j);
    std::map<std::size_t, EigenCluster> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].members.push_back(ev[i]);
    std::vector<EigenCluster> out;
    for (auto& [root, g] : groups) {
        cplx sum = 0.0;
        for (cplx v : g.members) sum += v;
        g.center = sum / static_cast<double>(g.members.size());
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace speclab
