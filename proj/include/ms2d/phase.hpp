#pragma once

#include "ms2d/fftutil.hpp"

#include <cstddef>
#include <vector>

namespace ms2d {

/**
 * Polynomial phase aberration model: quadratic over the horizontal (fragment)
 * frequency axis, linear over the vertical (precursor modulation) axis.
 * Coefficients are stored unwrapped; wrapping happens only when the phase is
 * turned into a rotation factor.
 */
struct PhaseModel {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // rad, rad/Hz, rad/Hz^2
    double d0 = 0.0, d1 = 0.0;            // rad, rad/Hz
    double v_bandwidth_hz = 0.0;

    // total phase turns across the vertical band
    double v_rotations() const;
};

double eval_phase_h(double f_hz, const PhaseModel& m);
double eval_phase_v(double f_hz, const PhaseModel& m);

/** out[k] = in[k] * exp(-i (c0 + c1 f[k] + c2 f[k]^2)), in place. */
void apply_phase(cplx* spec, const double* freq_hz, size_t n, double c0, double c1,
                 double c2);

/** Linear interpolation of a complex spectrum at a fractional bin position. */
cplx complex_at(const cplx* spec, size_t n, double pos);

/** Coefficient search ranges for the optimizer's seeding stage. */
struct SeedRange {
    double lo = 0.0, hi = 0.0;
};
struct PhaseSeeds {
    SeedRange c1;  // rad/Hz
    SeedRange c2;  // rad/Hz^2; ignored by the linear (vertical) fit
};

struct PhaseFitResult {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double objective = 0.0;  // minimized; -(sum of corrected real heights - penalty)
    size_t n_peaks = 0;
    double rotations = 0.0;  // |c1| * band / 2 pi
};

/**
 * Fits quadratic phase to one complex spectrum. Anchors are magnitude peaks at
 * 6 sigma; requires at least 3 spanning half the band. Seeded by a coherence
 * scan over the given coefficient ranges, refined by Nelder-Mead on the
 * height-minus-negative-excursion objective.
 */
PhaseFitResult optimize_phase_h(const cplx* spec, const double* freq_hz, size_t n,
                                const PhaseSeeds& seeds);

/** Linear fit for a single vertical scan (needs at least 1 anchor peak). */
PhaseFitResult optimize_phase_v_single(const cplx* spec, const double* freq_hz, size_t n,
                                       const PhaseSeeds& seeds);

/** Joint linear fit: scans are summed elementwise before fitting. */
PhaseFitResult optimize_phase_v(const std::vector<std::vector<cplx>>& scans,
                                const double* freq_hz, size_t n, const PhaseSeeds& seeds);

} // namespace ms2d
