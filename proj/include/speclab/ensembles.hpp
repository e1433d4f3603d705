#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace speclab {

enum class EnsembleKind { WignerReal, WignerComplex, MarchenkoPastur };

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::WignerReal;
    int N = 1;
    int M = 1;  // Marchenko–Pastur only
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument. For Marchenko–Pastur the growth
    /// condition N^{1/c} <= M <= N^c is checked with c = 4.
    void validate() const;
};

/// Sampled Marchenko–Pastur pair: Y is M x N, X = Y* Y is N x N.
struct MpSample {
    Eigen::MatrixXcd Y;
    Eigen::MatrixXcd X;
};

/// Gaussian Wigner matrix. Off-diagonal entries have variance 1/N (complex
/// kind: real and imaginary parts 1/(2N) each). Diagonal entries are real
/// with variance 2/N for the real kind (GOE) and 1/N for the complex kind
/// (GUE). The upper triangle is drawn row by row and mirrored exactly.
Eigen::MatrixXcd sample_wigner(const EnsembleSpec& spec);

/// Same draw as sample_wigner for EnsembleKind::WignerReal, stored as real.
Eigen::MatrixXd sample_wigner_real(const EnsembleSpec& spec);

/// Real Gaussian Y with E Y_ij = 0, E Y_ij^2 = 1/sqrt(NM), and X = Y^T Y.
MpSample sample_mp(const EnsembleSpec& spec);

}  // namespace speclab
