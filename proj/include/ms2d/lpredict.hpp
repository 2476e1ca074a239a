#pragma once

#include <cstddef>
#include <vector>

namespace ms2d {

/**
 * Backward autoregressive predictor x(n) ~ c + sum_k a_k x(n+k), k = 1..p.
 * The affine term absorbs the constant baseline of raised-cosine modulated
 * interferograms, so p poles cover p/2 real tones exactly with the baseline
 * handled separately.
 */
struct LPModel {
    size_t p = 0;
    std::vector<double> coeff;  // a_1..a_p
    double intercept = 0.0;
    double train_rms = 0.0;     // prediction residual over the training window
    double train_peak = 0.0;    // max |x| over the training window (guard scale)
};

/**
 * Least-squares fit over samples [train_begin, train_end). Requires the window
 * to hold at least 4p usable equations. Throws on rank deficiency; callers may
 * retry with a smaller order.
 */
LPModel fit_backward_lp(const double* x, size_t n, size_t p, size_t train_begin,
                        size_t train_end);

/** Fit with the default training window, the last half of the signal. */
LPModel fit_backward_lp(const double* x, size_t n, size_t p);

/**
 * Rebuilds samples [0, n_corrupt) by backward recursion; samples at and above
 * n_corrupt are untouched. Returns false when the instability guard trips
 * (an extrapolated sample exceeding 10x the training peak): the corrupt region
 * is zeroed instead of trusting a diverging model.
 */
bool repair_initial(double* x, size_t n, const LPModel& m, size_t n_corrupt);

/** Corrupt-region length from the vertical phase rotation count. */
size_t estimate_n_corrupt(double v_rotations, size_t n);

} // namespace ms2d
