#include "speclab/perturbation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace speclab {

MatrixPoly::MatrixPoly(std::vector<CMatrix> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("MatrixPoly needs at least one coefficient");
    const Eigen::Index n = coeffs_.front().rows();
    for (const auto& c : coeffs_) {
        if (c.rows() != n || c.cols() != n) throw std::invalid_argument("MatrixPoly coefficients must be n x n");
    }
}

CMatrix MatrixPoly::operator()(cplx z) const {
    CMatrix acc = coeffs_.back();
    for (auto it = coeffs_.rbegin() + 1; it != coeffs_.rend(); ++it) acc = z * acc + *it;
    return acc;
}

PerturbationModel::PerturbationModel(CMatrix p, MatrixPoly c, CMatrix q)
    : p_(std::move(p)), c_(std::move(c)), q_(std::move(q)) {
    const Eigen::Index n = c_.size();
    if (p_.cols() != n || q_.rows() != n || q_.cols() != p_.rows()) {
        throw std::invalid_argument("perturbation factors: P is N x n, C is n x n, Q is n x N");
    }
    if (!p_.allFinite() || !q_.allFinite()) throw std::invalid_argument("perturbation factors must be finite");
    qp_ = q_ * p_;
    norm_p_ = norm(p_, NormKind::spectral());
    norm_q_ = norm(q_, NormKind::spectral());
    c_p_ = sparsity_counts(p_).cols;
    r_q_ = sparsity_counts(q_).rows;
}

PerturbationModel PerturbationModel::coordinate(int N, const std::vector<int>& rows, const std::vector<int>& cols,
                                                MatrixPoly c) {
    if (rows.size() != cols.size() || static_cast<Eigen::Index>(rows.size()) != c.size()) {
        throw std::invalid_argument("coordinate model: index lists must match the size of C");
    }
    const Eigen::Index n = c.size();
    CMatrix p = CMatrix::Zero(N, n);
    CMatrix q = CMatrix::Zero(n, N);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (rows[j] < 0 || rows[j] >= N || cols[j] < 0 || cols[j] >= N) {
            throw std::invalid_argument("coordinate model: index out of range");
        }
        p(rows[j], j) = 1.0;
        q(j, cols[j]) = 1.0;
    }
    PerturbationModel m(std::move(p), std::move(c), std::move(q));
    m.coord_rows_ = rows;
    m.coord_cols_ = cols;
    return m;
}

bool PerturbationModel::rank_advisory_ok() const {
    return static_cast<double>(n()) <= std::log(static_cast<double>(N()));
}

PerturbationModel PerturbationModel::resized(int N) const {
    if (coord_rows_.empty() && n() > 0) throw std::logic_error("resized() needs a coordinate model");
    return coordinate(N, coord_rows_, coord_cols_, c_);
}

CMatrix eval_perturbation(const PerturbationModel& model, cplx z) { return model.P() * model.C()(z) * model.Q(); }

CMatrix c_inverse(const PerturbationModel& model, cplx z) { return checked_inverse(model.C()(z), "C(z)"); }

CMatrix K_of_z(const PerturbationModel& model, const LimitLaw& law, cplx z, BoundaryMode mode) {
    const cplx m = m_law(z, law, mode);
    return c_inverse(model, z) + m * model.QP();
}

CMatrix L_of_z(const PerturbationModel& model, const CMatrix& xres, cplx z) {
    if (xres.rows() != model.N() || xres.cols() != model.N()) throw std::invalid_argument("L_of_z: Xres must be N x N");
    return c_inverse(model, z) + model.Q() * xres * model.P();
}

CMatrix limit_resolvent(const PerturbationModel& model, const LimitLaw& law, cplx z) {
    const cplx m = m_law(z, law);
    const Eigen::Index N = model.N();
    CMatrix out = m * CMatrix::Identity(N, N);
    if (model.n() == 0) return out;
    const CMatrix kinv = checked_inverse(K_of_z(model, law, z), "K(z)");
    out.noalias() -= (m * m) * (model.P() * kinv * model.Q());
    return out;
}

void DeformedWindowParams::validate() const {
    if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("deformed window beta must lie in (0, 1/2)");
    if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("deformed window omega must lie in (0, 1)");
    if (base == Base::Rectangle && !(re_min <= re_max && im_min <= im_max)) {
        throw std::invalid_argument("deformed window rectangle is empty");
    }
}

namespace {

bool in_base(const LimitLaw& law, cplx z, const DeformedWindowParams& params, int N) {
    if (params.base == DeformedWindowParams::Base::Rectangle) {
        return z.real() >= params.re_min && z.real() <= params.re_max && z.imag() >= params.im_min &&
               z.imag() <= params.im_max;
    }
    WindowParams w;
    w.omega = params.omega;
    w.beta = params.beta;
    w.N = N;
    return in_spectral_window(law, z, w);
}

}  // namespace

bool in_deformed_window(const PerturbationModel& model, const LimitLaw& law, cplx z, const DeformedWindowParams& params,
                        int N) {
    params.validate();
    if (N < 1) throw std::invalid_argument("in_deformed_window: N must be positive");
    if (!in_base(law, z, params, N)) return false;
    if (model.n() == 0) return true;
    CMatrix k;
    try {
        k = K_of_z(model, law, z);
    } catch (const SingularMatrixError&) {
        return false;  // C(z) singular
    }
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(k).singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0) || smin < kSingularRcond * s(0)) return false;
    return 1.0 / smin < std::pow(static_cast<double>(N), params.beta);
}

bool in_deformed_window(const JordanSpec& jordan, const LimitLaw& law, cplx z, const DeformedWindowParams& params,
                        int N) {
    params.validate();
    jordan.validate();
    if (N < 1) throw std::invalid_argument("in_deformed_window: N must be positive");
    if (!in_base(law, z, params, N)) return false;
    const double e = params.variant == DeformedWindowParams::Variant::S ? params.beta * params.omega : params.beta;
    const double floor = std::pow(static_cast<double>(N), -e);
    const cplx m = m_law(z, law);
    for (const auto& entry : jordan.entries) {
        if (std::pow(std::abs(1.0 + entry.xi * m), entry.p()) < floor) return false;
    }
    return true;
}

double resolvent_error_from_inverse(const CMatrix& xinv, const PerturbationModel& model, const LimitLaw& law, cplx z) {
    const CMatrix mt = limit_resolvent(model, law, z);
    if (model.n() == 0) return norm(xinv - mt, NormKind::max());
    const CMatrix inv = woodbury_inverse(xinv, model.P(), c_inverse(model, z), model.Q());
    return norm(inv - mt, NormKind::max());
}

double resolvent_error(const CMatrix& xz_plus_a, const PerturbationModel& model, const LimitLaw& law, cplx z) {
    if (xz_plus_a.rows() != model.N() || xz_plus_a.cols() != model.N()) {
        throw std::invalid_argument("resolvent_error: matrix must be N x N");
    }
    const CMatrix x = xz_plus_a - eval_perturbation(model, z);
    const CMatrix xinv = x.partialPivLu().inverse();
    // Frobenius condition estimate; cheap next to the inverse itself.
    const double rc = 1.0 / (x.norm() * xinv.norm());
    if (!(rc >= kSingularRcond)) throw SingularMatrixError("resolvent_error: X(z) is numerically singular", rc);
    return resolvent_error_from_inverse(xinv, model, law, z);
}

}  // namespace speclab
