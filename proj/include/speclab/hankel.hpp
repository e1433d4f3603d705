#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "speclab/matops.hpp"
#include "speclab/stats.hpp"

namespace speclab {

struct SignalMode {
    cplx amplitude;
    cplx pole;  // |pole| < 1
};

/// s_j = sum_k a_k z_k^j + sigma g_j, j = 0..2n-1, g_j standard Gaussian.
struct SignalModel {
    std::vector<SignalMode> modes;
    int n = 1;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

CVector synth_signal(const SignalModel& model);

struct HankelPencil {
    CMatrix U0;  // s_{i+j}
    CMatrix U1;  // s_{i+j+1}
};

HankelPencil hankel_pencil(const CVector& s);

/// Fewer admissible eigenvalues than requested.
class ModeCountError : public std::runtime_error {
public:
    ModeCountError(const std::string& what, int found) : std::runtime_error(what), found_(found) {}
    int found() const noexcept { return found_; }

private:
    int found_;
};

/// k generalized eigenvalues of z U0 - U1 inside the closed unit disk.
/// The pencil is restricted to the dominant r-dimensional singular subspace
/// of U0, starting at r = min(k, numerical rank) and growing until k
/// admissible values exist. Ranked by |z| < 1 first, then by the residual
/// sigma_min-normalized ||(z U0 - U1) v||.
std::vector<cplx> pencil_modes(const CMatrix& U0, const CMatrix& U1, int k);

/// Minimum-total-distance matching of estimates to truth (exhaustive for
/// k <= 8). Returns the matched distances in the order of `truth`.
std::vector<double> match_modes(const std::vector<cplx>& estimates, const std::vector<cplx>& truth);

/// Unitary V with V u_k in span(e_1..e_k) for the Vandermonde vectors
/// u_k = (1, z_k, ..., z_k^{n-1}).
CMatrix mode_rotation(const std::vector<cplx>& poles, int n);

struct NoiseDecayResult {
    RateEstimate rate;
    std::vector<std::pair<int, double>> samples;  // (n, ||block||_max)
    int discarded = 0;                            // numerically singular pencils
    bool conjecture_consistent = false;           // slope in [-0.7, -0.3]
    Frequency bootstrap;                          // resampled slopes in range
};

/// One pure-noise draw: max-norm of the top-left k x k block of
/// V (z U0 - U1)^{-1} V^*, or nothing when the pencil is numerically singular.
std::optional<double> noise_resolvent_sample(int n, cplx z_probe, double sigma, std::uint64_t seed,
                                             const std::vector<cplx>& poles);

/// Resamples each n's values with replacement, refits the median slope and
/// reports how often it lands in [lo, hi].
Frequency bootstrap_slope_frequency(const std::vector<std::pair<int, double>>& samples, double lo, double hi,
                                    int resamples, std::uint64_t seed);

/// For each n: pure-noise pencils z U0 - U1 (entries sigma g), the max-norm
/// of the top-left k x k block of V (z U0 - U1)^{-1} V^*, median over trials,
/// log-log slope.
NoiseDecayResult noise_resolvent_decay(const std::vector<int>& n_grid, cplx z_probe, int trials, double sigma,
                                       std::uint64_t seed, const std::vector<cplx>& poles, int bootstrap = 200);

}  // namespace speclab
