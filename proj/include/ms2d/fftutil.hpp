#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ms2d {

using cplx = std::complex<double>;

/**
 * Forward transforms over FFTW with per-length cached plans. Plans are created
 * under a lock with FFTW_ESTIMATE (deterministic algorithm choice, no timing)
 * and executed via the new-array interface, so concurrent calls from worker
 * threads are safe. Unnormalized (plain sums), matching the usual convention.
 */

/**
 * Real input of length n_in, zero-padded to n_pad (power of two not required,
 * n_pad >= n_in, n_pad even). Writes n_pad/2 bins [0, Nyquist) to `out`.
 */
void rfft_half(const double* in, size_t n_in, size_t n_pad, cplx* out);

/**
 * Complex input of length n_in zero-padded to n_pad; writes n_pad/2 positive-
 * frequency bins to `out` (the negative half is discarded by the caller's
 * convention for amplitude-modulated data).
 */
void cfft_half(const cplx* in, size_t n_in, size_t n_pad, cplx* out);

/** Full complex forward transform, n bins out; used by small oracles. */
void cfft_full(const cplx* in, size_t n, cplx* out);

/** Releases cached plans (idempotent; call at process end if desired). */
void fft_cleanup();

} // namespace ms2d
