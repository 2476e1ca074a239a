#pragma once

#include <string>
#include <vector>

namespace ms2d {

enum class WindowFamily { none, sine_bell, kv_asym, kv_asym_sqrt };

struct ApodizationSpec {
    WindowFamily family = WindowFamily::none;
    double f = 0.25;          // maximum position as a fraction of length (asymmetric families)
    double sine_shift = 0.5;  // sine-bell phase shift in [0,1]
};

WindowFamily window_family_from_name(const std::string& name);
std::string window_family_name(WindowFamily f);

/**
 * Asymmetric rise/fall apodization: half-cosine rise to 1 at sample NF-1
 * (NF = round(N*F), ties up), plateau of 1 through NF, then a half-cosine fall
 * to 0 at N-1. sqrt_fall takes the square root of the fall segment only, which
 * keeps more late-transient signal.
 */
std::vector<double> kv_window(size_t n, double f, bool sqrt_fall);

/** w(n) = sin(pi*(shift + (1-shift)*n/(N-1))). shift=0 is the plain sine bell. */
std::vector<double> sine_bell(size_t n, double shift);

/** Window per spec, or empty vector for family none. */
std::vector<double> make_window(const ApodizationSpec& spec, size_t n);

/** Elementwise product; family none is the identity. */
void apply_window(double* signal, size_t n, const std::vector<double>& window);

} // namespace ms2d
