#include "ms2d/calib.hpp"

#include "ms2d/common.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace ms2d {

double freq_to_mz(double f_hz, const Calibration& c) {
    if (!c.valid()) throw UsageError("calibration constants not set");
    double fp = f_hz + c.modulation_offset;
    if (fp <= 0.0) throw Error("frequency must be positive after offset");
    return c.A / fp + c.B / (fp * fp);
}

double mz_to_freq(double mz, const Calibration& c) {
    if (!c.valid()) throw UsageError("calibration constants not set");
    if (mz <= 0.0) throw UsageError("m/z must be positive");
    // B*u^2 + A*u - mz = 0 with u = 1/f'; the root continuous with B -> 0 is
    // u = 2*mz / (A + sqrt(A^2 + 4*B*mz)), numerically stable for small B.
    double disc = c.A * c.A + 4.0 * c.B * mz;
    if (disc < 0.0) throw Error("no real frequency solution for m/z");
    double denom = c.A + std::sqrt(disc);
    if (denom <= 0.0) throw Error("no positive frequency solution for m/z");
    double u = 2.0 * mz / denom;
    double fp = 1.0 / u;
    double f = fp - c.modulation_offset;
    if (fp <= 0.0) throw Error("no positive frequency solution for m/z");
    return f;
}

CalibFit fit_calibration(const std::vector<std::pair<double, double>>& refs, double offset) {
    if (refs.size() < 2) throw UsageError(">= 2 references required");
    for (size_t i = 0; i < refs.size(); ++i)
        for (size_t j = i + 1; j < refs.size(); ++j)
            if (refs[i].first == refs[j].first)
                throw UsageError("degenerate references: identical frequencies");

    Eigen::MatrixXd M(refs.size(), 2);
    Eigen::VectorXd y(refs.size());
    for (size_t i = 0; i < refs.size(); ++i) {
        double fp = refs[i].first + offset;
        if (fp <= 0.0) throw UsageError("reference frequency must be positive after offset");
        M(i, 0) = 1.0;
        M(i, 1) = 1.0 / fp;
        y(i) = refs[i].second * fp;  // mz*f' = A + B/f'
    }
    Eigen::Vector2d ab = M.colPivHouseholderQr().solve(y);

    CalibFit out;
    out.cal.A = ab(0);
    out.cal.B = ab(1);
    out.cal.modulation_offset = offset;
    double ss = 0.0;
    for (const auto& [f, mz] : refs) {
        double d = freq_to_mz(f, out.cal) - mz;
        ss += d * d;
    }
    out.rms_residual_mz = std::sqrt(ss / double(refs.size()));
    return out;
}

Axes make_axes(size_t n_rows, size_t n_cols, double sample_rate_hz, double dt1_s,
               const Calibration& cal_h, const Calibration& cal_v) {
    if (n_rows == 0 || n_cols == 0) throw UsageError("axes require nonzero dimensions");
    if (sample_rate_hz <= 0.0 || dt1_s <= 0.0) throw UsageError("axes require positive rates");
    Axes ax;
    ax.df_h = sample_rate_hz / (2.0 * double(n_cols));
    ax.df_v = (1.0 / dt1_s) / (2.0 * double(n_rows));
    ax.h_hz.resize(n_cols);
    ax.v_hz.resize(n_rows);
    ax.h_mz.assign(n_cols, std::numeric_limits<double>::quiet_NaN());
    ax.v_mz.assign(n_rows, std::numeric_limits<double>::quiet_NaN());
    for (size_t k = 0; k < n_cols; ++k) {
        ax.h_hz[k] = double(k) * ax.df_h;
        if (cal_h.valid() && ax.h_hz[k] > 0.0)
            ax.h_mz[k] = freq_to_mz(ax.h_hz[k], cal_h);
    }
    // bin 0 keeps the NaN sentinel in both dimensions: zero frequency has no m/z
    for (size_t r = 0; r < n_rows; ++r) {
        ax.v_hz[r] = double(r) * ax.df_v;
        if (r > 0 && cal_v.valid() && ax.v_hz[r] + cal_v.modulation_offset > 0.0)
            ax.v_mz[r] = freq_to_mz(ax.v_hz[r], cal_v);
    }
    return ax;
}

} // namespace ms2d
