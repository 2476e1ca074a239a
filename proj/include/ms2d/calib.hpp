#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ms2d {

/**
 * Two-term frequency <-> m/z conversion: m/z = A/f' + B/f'^2.
 * For the vertical (precursor) dimension the measured line positions are
 * modulation frequencies; conversion uses f' = f + modulation_offset
 * (cyclotron = modulation + offset), and mz_to_freq returns modulation
 * frequency again.
 */
struct Calibration {
    double A = 0.0;                  // Hz*Th
    double B = 0.0;                  // Hz^2*Th
    double modulation_offset = 0.0;  // Hz; 0 for the horizontal dimension

    bool valid() const { return A > 0.0; }
};

double freq_to_mz(double f_hz, const Calibration& c);
double mz_to_freq(double mz, const Calibration& c);

struct CalibFit {
    Calibration cal;
    double rms_residual_mz = 0.0;  // over the reference list
};

/**
 * Least squares on mz*f ~ A + B/f, linear in (A,B). Exact for two distinct
 * references. The modulation offset is not fitted; pass it in `offset` and
 * reference frequencies are taken as measured (offset applied internally).
 */
CalibFit fit_calibration(const std::vector<std::pair<double, double>>& refs_f_mz,
                         double offset = 0.0);

struct Axes {
    std::vector<double> h_mz, v_mz;  // per-bin m/z; bin 0 = NaN sentinel where f'=0
    std::vector<double> h_hz, v_hz;  // per-bin frequency (Hz); vertical = modulation
    double df_h = 0.0, df_v = 0.0;
};

/**
 * Per-bin axes for an n_rows x n_cols spectrum. Horizontal bin k sits at
 * k*rate/(2*n_cols); vertical bin r at r*(1/dt1)/(2*n_rows).
 */
Axes make_axes(size_t n_rows, size_t n_cols, double sample_rate_hz, double dt1_s,
               const Calibration& cal_h, const Calibration& cal_v);

} // namespace ms2d
