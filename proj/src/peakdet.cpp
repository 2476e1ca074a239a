#include "ms2d/peakdet.hpp"

#include "ms2d/common.hpp"

#include <algorithm>
#include <cmath>

namespace ms2d {

double noise_sigma_mad(const double* v, size_t n) {
    if (n == 0) throw UsageError("noise region is empty");
    std::vector<double> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = std::fabs(v[i]);
    size_t mid = n / 2;
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    double med = a[mid];
    if (n % 2 == 0) {
        double lower = *std::max_element(a.begin(), a.begin() + mid);
        med = 0.5 * (med + lower);
    }
    return 1.4826 * med;
}

std::pair<size_t, size_t> auto_noise_region(const double* v, size_t n) {
    if (n < 8) return {0, n};
    size_t seg = n / 8;
    size_t best = 0;
    double best_var = -1.0;
    for (size_t s = 0; s + seg <= n; s += seg) {
        double ss = 0.0;
        for (size_t i = s; i < s + seg; ++i) ss += v[i] * v[i];
        double var = ss / double(seg);
        if (best_var < 0.0 || var < best_var) {
            best_var = var;
            best = s;
        }
    }
    return {best, best + seg};
}

std::pair<double, double> parabolic_vertex(double ym, double y0, double yp) {
    double denom = ym - 2.0 * y0 + yp;
    if (denom == 0.0) return {0.0, y0};
    double d = 0.5 * (ym - yp) / denom;
    d = std::clamp(d, -0.5, 0.5);
    double apex = y0 - 0.25 * (ym - yp) * d;
    return {d, apex};
}

double fwhm_bins(const double* v, size_t n, size_t idx) {
    double half = v[idx] * 0.5;
    // walk outward to the first crossings below half height
    size_t lo = idx;
    while (lo > 0 && v[lo] > half) --lo;
    if (v[lo] > half) return 0.0;
    size_t hi = idx;
    while (hi + 1 < n && v[hi] > half) ++hi;
    if (v[hi] > half) return 0.0;
    double xlo = double(lo) + (half - v[lo]) / (v[lo + 1] - v[lo]);
    double xhi = double(hi) - (half - v[hi]) / (v[hi - 1] - v[hi]);
    return xhi - xlo;
}

std::vector<RawPeak> find_peaks_1d(const double* v, size_t n, double threshold,
                                   bool square_values) {
    std::vector<RawPeak> out;
    if (n < 3) return out;
    for (size_t i = 1; i + 1 < n; ++i) {
        double y = v[i];
        if (y < threshold) continue;
        // strict rise on the left, ties broken toward the lower index on the right
        if (!(v[i - 1] < y && y >= v[i + 1])) continue;
        if (y == v[i + 1]) {
            // plateau: report only the first sample of it
        }
        RawPeak p;
        p.index = i;
        double ym = v[i - 1], y0 = y, yp = v[i + 1];
        if (square_values) {
            ym *= v[i - 1];
            y0 *= y;
            yp *= v[i + 1];
        }
        auto [d, apex] = parabolic_vertex(ym, y0, yp);
        p.centroid = double(i) + d;
        p.height = square_values ? std::sqrt(std::max(apex, 0.0)) : apex;
        p.fwhm = fwhm_bins(v, n, i);
        out.push_back(p);
    }
    return out;
}

} // namespace ms2d
