#pragma once

#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace speclab {

/// One eigenvalue xi of D = C Q P with the sizes of its Jordan blocks.
struct JordanEntry {
    std::complex<double> xi;
    std::vector<int> blocks;

    /// Algebraic multiplicity.
    int k() const { return std::accumulate(blocks.begin(), blocks.end(), 0); }
    /// Largest block.
    int p() const {
        int best = 0;
        for (int b : blocks) best = b > best ? b : best;
        return best;
    }
};

/// Jordan structure of D, supplied by the caller. Block sizes cannot be read
/// off a floating-point matrix reliably, so they are never computed.
struct JordanSpec {
    std::vector<JordanEntry> entries;

    int total() const {
        int n = 0;
        for (const auto& e : entries) n += e.k();
        return n;
    }

    /// Blocks nonempty and positive; with n >= 0, the multiplicities sum to n.
    void validate(int n = -1) const {
        for (const auto& e : entries) {
            if (e.blocks.empty()) throw std::invalid_argument("Jordan entry without blocks");
            for (int b : e.blocks)
                if (b < 1) throw std::invalid_argument("Jordan block size must be positive");
        }
        if (n >= 0 && total() != n) throw std::invalid_argument("Jordan multiplicities do not sum to n");
    }
};

}  // namespace speclab
