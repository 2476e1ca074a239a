#pragma once

#include "ms2d/fftutil.hpp"

#include <cstddef>
#include <vector>

namespace ms2d {

struct DenoiseSpec {
    bool enabled = false;
    size_t rank = 20;
    size_t iterations = 1;
    size_t hankel_rows = 0;  // 0 = length / 2
};

/**
 * Rank-reduction denoising: embed the signal in a Hankel matrix, keep the
 * leading singular subspace, average the anti-diagonals back into a signal.
 * Deterministic (full dense SVD, no randomized sketching). Output RMS never
 * exceeds input RMS.
 */
std::vector<double> cadzow(const std::vector<double>& x, const DenoiseSpec& spec);
std::vector<cplx> cadzow(const std::vector<cplx>& x, const DenoiseSpec& spec);

} // namespace ms2d
