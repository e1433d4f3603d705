#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace speclab {

/// Scalar polynomial with coefficients in increasing powers.
class ScalarPoly {
public:
    ScalarPoly() : c_{0.0} {}
    ScalarPoly(std::initializer_list<std::complex<double>> c) : ScalarPoly(std::vector<std::complex<double>>(c)) {}
    explicit ScalarPoly(std::vector<std::complex<double>> c) : c_(std::move(c)) {
        if (c_.empty()) c_.push_back(0.0);
        while (c_.size() > 1 && c_.back() == std::complex<double>(0.0)) c_.pop_back();
    }

    /// Degree after trimming zero leading coefficients; the zero polynomial has degree 0.
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.size() == 1 && c_[0] == std::complex<double>(0.0); }
    std::complex<double> coeff(int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }
    const std::vector<std::complex<double>>& coeffs() const noexcept { return c_; }

    std::complex<double> operator()(std::complex<double> z) const {
        std::complex<double> acc = c_.back();
        for (auto it = c_.rbegin() + 1; it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    std::complex<double> derivative(std::complex<double> z) const {
        std::complex<double> acc = 0.0;
        for (int i = degree(); i >= 1; --i) acc = acc * z + static_cast<double>(i) * c_[i];
        return acc;
    }

    std::complex<double> second_derivative(std::complex<double> z) const {
        std::complex<double> acc = 0.0;
        for (int i = degree(); i >= 2; --i) acc = acc * z + static_cast<double>(i) * (i - 1) * c_[i];
        return acc;
    }

private:
    std::vector<std::complex<double>> c_;
};

}  // namespace speclab
