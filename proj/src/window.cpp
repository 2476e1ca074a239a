#include "ms2d/window.hpp"

#include "ms2d/common.hpp"

#include <cmath>

namespace ms2d {

WindowFamily window_family_from_name(const std::string& name) {
    if (name == "none") return WindowFamily::none;
    if (name == "sine-bell") return WindowFamily::sine_bell;
    if (name == "kv-asym") return WindowFamily::kv_asym;
    if (name == "kv-asym-sqrt") return WindowFamily::kv_asym_sqrt;
    throw UsageError("unknown window family: " + name);
}

std::string window_family_name(WindowFamily f) {
    switch (f) {
        case WindowFamily::none: return "none";
        case WindowFamily::sine_bell: return "sine-bell";
        case WindowFamily::kv_asym: return "kv-asym";
        case WindowFamily::kv_asym_sqrt: return "kv-asym-sqrt";
    }
    return "none";
}

std::vector<double> kv_window(size_t n, double f, bool sqrt_fall) {
    if (n < 4) throw UsageError("window length must be >= 4");
    if (!(f > 0.0 && f < 1.0)) throw UsageError("window maximum fraction must be in (0,1)");
    size_t nf = size_t(std::floor(double(n) * f + 0.5));
    if (nf < 2) nf = 2;
    if (nf > n - 2) nf = n - 2;

    std::vector<double> w(n);
    // rise: 0 at sample 0, 1 at sample nf-1
    for (size_t i = 0; i < nf; ++i)
        w[i] = 0.5 * (1.0 - std::cos(double(i) * M_PI / double(nf - 1)));
    // fall: 1 at sample nf, 0 at sample n-1
    for (size_t i = nf; i < n; ++i) {
        double a = 0.5 * (1.0 + std::cos(M_PI * double(i - nf) / double(n - 1 - nf)));
        w[i] = sqrt_fall ? std::sqrt(a) : a;
    }
    return w;
}

std::vector<double> sine_bell(size_t n, double shift) {
    if (n < 2) throw UsageError("window length must be >= 2");
    if (shift < 0.0 || shift > 1.0) throw UsageError("sine-bell shift must be in [0,1]");
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i)
        w[i] = std::sin(M_PI * (shift + (1.0 - shift) * double(i) / double(n - 1)));
    return w;
}

std::vector<double> make_window(const ApodizationSpec& spec, size_t n) {
    switch (spec.family) {
        case WindowFamily::none: return {};
        case WindowFamily::sine_bell: return sine_bell(n, spec.sine_shift);
        case WindowFamily::kv_asym: return kv_window(n, spec.f, false);
        case WindowFamily::kv_asym_sqrt: return kv_window(n, spec.f, true);
    }
    return {};
}

void apply_window(double* signal, size_t n, const std::vector<double>& window) {
    if (window.empty()) return;
    if (window.size() != n) throw UsageError("window/signal length mismatch");
    for (size_t i = 0; i < n; ++i) signal[i] *= window[i];
}

} // namespace ms2d
