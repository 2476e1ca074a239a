#include "ms2d/fftutil.hpp"

#include "ms2d/common.hpp"

#include <cstring>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

namespace ms2d {

namespace {

std::mutex g_plan_mx;
std::map<size_t, fftw_plan> g_r2c_plans;
std::map<size_t, fftw_plan> g_c2c_plans;

// FFTW_UNALIGNED keeps new-array execution valid for any caller buffer.
fftw_plan r2c_plan(size_t n) {
    std::lock_guard<std::mutex> lk(g_plan_mx);
    auto it = g_r2c_plans.find(n);
    if (it != g_r2c_plans.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(int(n), in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!p) throw Error("FFT plan creation failed (r2c, n=" + std::to_string(n) + ")");
    g_r2c_plans[n] = p;
    return p;
}

fftw_plan c2c_plan(size_t n) {
    std::lock_guard<std::mutex> lk(g_plan_mx);
    auto it = g_c2c_plans.find(n);
    if (it != g_c2c_plans.end()) return it->second;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(int(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!p) throw Error("FFT plan creation failed (c2c, n=" + std::to_string(n) + ")");
    g_c2c_plans[n] = p;
    return p;
}

// Per-thread scratch, grown on demand and counted against the working set.
struct Scratch {
    std::vector<double> rbuf;
    std::vector<cplx> cbuf, sbuf;
    mem::Tracked footprint;
    void ensure(size_t r, size_t c, size_t s) {
        bool grew = false;
        if (rbuf.size() < r) { rbuf.resize(r); grew = true; }
        if (cbuf.size() < c) { cbuf.resize(c); grew = true; }
        if (sbuf.size() < s) { sbuf.resize(s); grew = true; }
        if (grew)
            footprint.resize(rbuf.size() * sizeof(double) +
                             (cbuf.size() + sbuf.size()) * sizeof(cplx));
    }
};

thread_local Scratch t_scratch;

} // namespace

void rfft_half(const double* in, size_t n_in, size_t n_pad, cplx* out) {
    if (n_pad < n_in || n_pad < 2 || n_pad % 2 != 0)
        throw UsageError("invalid FFT padding");
    fftw_plan p = r2c_plan(n_pad);
    Scratch& sc = t_scratch;
    sc.ensure(n_pad, 0, n_pad / 2 + 1);
    std::memcpy(sc.rbuf.data(), in, n_in * sizeof(double));
    std::memset(sc.rbuf.data() + n_in, 0, (n_pad - n_in) * sizeof(double));
    fftw_execute_dft_r2c(p, sc.rbuf.data(), reinterpret_cast<fftw_complex*>(sc.sbuf.data()));
    std::memcpy(out, sc.sbuf.data(), (n_pad / 2) * sizeof(cplx));
}

void cfft_half(const cplx* in, size_t n_in, size_t n_pad, cplx* out) {
    if (n_pad < n_in || n_pad < 2 || n_pad % 2 != 0)
        throw UsageError("invalid FFT padding");
    fftw_plan p = c2c_plan(n_pad);
    Scratch& sc = t_scratch;
    sc.ensure(0, n_pad, n_pad);
    std::memcpy(sc.cbuf.data(), in, n_in * sizeof(cplx));
    std::fill(sc.cbuf.begin() + n_in, sc.cbuf.begin() + n_pad, cplx(0.0, 0.0));
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(sc.cbuf.data()),
                     reinterpret_cast<fftw_complex*>(sc.sbuf.data()));
    std::memcpy(out, sc.sbuf.data(), (n_pad / 2) * sizeof(cplx));
}

void cfft_full(const cplx* in, size_t n, cplx* out) {
    if (n < 1) throw UsageError("invalid FFT length");
    fftw_plan p = c2c_plan(n);
    Scratch& sc = t_scratch;
    sc.ensure(0, n, n);
    std::memcpy(sc.cbuf.data(), in, n * sizeof(cplx));
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(sc.cbuf.data()),
                     reinterpret_cast<fftw_complex*>(sc.sbuf.data()));
    std::memcpy(out, sc.sbuf.data(), n * sizeof(cplx));
}

void fft_cleanup() {
    std::lock_guard<std::mutex> lk(g_plan_mx);
    for (auto& [n, p] : g_r2c_plans) fftw_destroy_plan(p);
    for (auto& [n, p] : g_c2c_plans) fftw_destroy_plan(p);
    g_r2c_plans.clear();
    g_c2c_plans.clear();
}

} // namespace ms2d
