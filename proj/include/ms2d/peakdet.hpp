#pragma once

#include <cstddef>
#include <vector>

namespace ms2d {

/**
 * Robust noise scale: 1.4826 * median(|v|), i.e. scaled median absolute
 * deviation about the zero baseline. Equals sigma for zero-mean Gaussian
 * noise; for rectified (magnitude-mode) noise the floor offset counts as
 * noise, which is what limits peak detection there.
 */
double noise_sigma_mad(const double* v, size_t n);

/**
 * Picks the quietest contiguous eighth of the scan (lowest variance about
 * zero) as an automatic noise region. Returns [begin, end).
 */
std::pair<size_t, size_t> auto_noise_region(const double* v, size_t n);

struct RawPeak {
    size_t index = 0;       // sample index of the local maximum
    double centroid = 0.0;  // sub-bin position from 3-point parabola
    double height = 0.0;    // parabola apex value (working values)
    double fwhm = 0.0;      // bins, from half-height crossings
};

/**
 * Local maxima above `threshold` (absolute units of the working values).
 * square_values works on v^2 (magnitude-mode centroiding); reported heights
 * are brought back to the original scale. FWHM uses linear interpolation of
 * the half-height crossings on the original values, searching outward from
 * the maximum. Peaks whose half-height crossing is not found before the scan
 * edge get fwhm = 0.
 */
std::vector<RawPeak> find_peaks_1d(const double* v, size_t n, double threshold,
                                   bool square_values = false);

/** 3-point parabolic vertex offset in [-0.5, 0.5] and interpolated apex. */
std::pair<double, double> parabolic_vertex(double ym, double y0, double yp);

/** FWHM in bins around a local maximum, 0 when a crossing is missing. */
double fwhm_bins(const double* v, size_t n, size_t idx);

} // namespace ms2d
