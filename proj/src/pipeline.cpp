#include "ms2d/pipeline.hpp"

#include "ms2d/common.hpp"
#include "ms2d/fftutil.hpp"
#include "ms2d/lpredict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>

namespace fs = std::filesystem;

namespace ms2d {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt_g(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

size_t stripe_width(size_t budget, uint64_t n_rows, uint64_t n_cols) {
    size_t per_col = size_t(n_rows) * sizeof(double);
    size_t w = per_col ? budget / per_col : size_t(n_cols);
    return std::clamp<size_t>(w, 1, size_t(n_cols));
}

// Center of mass of a window, rounded to a whole sample. Phase fits run on
// records cyclically rotated so this point sits at the transform origin. The
// rotation is an exact per-bin linear phase, and it flattens the steep phase
// ramp a mid-record envelope writes across every line; without it the large
// first-neighbor bins of a line sit near quadrature, and the negative-
// excursion penalty locks a sparse fit onto integer-bin point phases instead
// of the anchor phases. The known rotation slope is added to the seed range
// and subtracted from the fitted coefficient, so reported models keep the
// record start as their time origin.
size_t window_center(const std::vector<double>& w) {
    double mass = 0.0, moment = 0.0;
    for (size_t t = 0; t < w.size(); ++t) {
        mass += w[t];
        moment += double(t) * w[t];
    }
    if (mass <= 0.0) return w.size() / 2;
    return size_t(std::llround(std::clamp(moment / mass, 0.0, double(w.size() - 1))));
}

// Windowed record placed in a pad-length buffer with sample `shift` moved to
// the origin; the leading [0, shift) samples wrap to the buffer tail.
void center_record(const double* x, size_t n, size_t shift, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (size_t t = 0; t < n; ++t) out[(t + out.size() - shift) % out.size()] = x[t];
}

/**
 * One-line transform with reusable scratch: window, zero-pad to n * 2^zf,
 * real-input FFT, then either phase rotation + real part or modulus.
 */
struct LineKernel {
    size_t n_time = 0, pad = 0, bins = 0;
    SpectrumMode mode = SpectrumMode::magnitude;
    bool rotate = false;
    double df = 0.0, p0 = 0.0, p1 = 0.0, p2 = 0.0;
    const std::vector<double>* window = nullptr;
    std::vector<double> xt;
    std::vector<cplx> spec;
    mem::Tracked footprint;

    void init(size_t n, int zf, SpectrumMode m, double df_hz, double a0, double a1,
              double a2, const std::vector<double>& w) {
        if (zf < 0 || zf > 12) throw UsageError("zerofill count out of range");
        n_time = n;
        pad = n << size_t(zf);
        if (n == 0 || pad % 2) throw UsageError("transform length must be even and nonzero");
        bins = pad / 2;
        mode = m;
        df = df_hz;
        p0 = a0;
        p1 = a1;
        p2 = a2;
        rotate = m == SpectrumMode::absorption && (a0 != 0.0 || a1 != 0.0 || a2 != 0.0);
        window = &w;
        xt.resize(n_time);
        spec.resize(bins);
        footprint.resize(n_time * sizeof(double) + bins * sizeof(cplx));
    }

    void run(const double* x, double* out) {
        std::copy(x, x + n_time, xt.begin());
        apply_window(xt.data(), n_time, *window);
        rfft_half(xt.data(), n_time, pad, spec.data());
        if (mode == SpectrumMode::absorption) {
            if (rotate)
                for (size_t k = 0; k < bins; ++k) {
                    double f = double(k) * df;
                    spec[k] *= std::polar(1.0, -(p0 + (p1 + p2 * f) * f));
                }
            for (size_t k = 0; k < bins; ++k) out[k] = spec[k].real();
        } else {
            for (size_t k = 0; k < bins; ++k) out[k] = std::abs(spec[k]);
        }
    }
};

void dataset_timing(const Dataset& d, double& rate_hz, double& dt1_s, bool need_rate) {
    if (const AcquisitionParams* p = d.params()) {
        rate_hz = p->sample_rate_hz;
        dt1_s = p->dt1_s;
        return;
    }
    rate_hz = 0.0;
    dt1_s = 0.0;
    if (sidecar_exists(d.path())) {
        Config sc = read_sidecar(d.path());
        rate_hz = sc.get_f64("sample_rate_hz", 0.0);
        dt1_s = sc.get_f64("dt1_s", 0.0);
    }
    if (dt1_s <= 0.0 || (need_rate && rate_hz <= 0.0))
        throw UsageError("input dataset carries no acquisition timing");
}

ApodizationSpec parse_apod(const Config& cfg, const std::string& prefix,
                           const ApodizationSpec& def) {
    ApodizationSpec a = def;
    if (cfg.has(prefix + ".family"))
        a.family = window_family_from_name(cfg.get_str(prefix + ".family", ""));
    if (cfg.has(prefix + ".sqrt_fall") &&
        (a.family == WindowFamily::kv_asym || a.family == WindowFamily::kv_asym_sqrt))
        a.family = cfg.get_bool(prefix + ".sqrt_fall", false) ? WindowFamily::kv_asym_sqrt
                                                              : WindowFamily::kv_asym;
    a.f = cfg.get_f64(prefix + ".f", a.f);
    a.sine_shift = cfg.get_f64(prefix + ".shift", a.sine_shift);
    if (!(a.f > 0.0 && a.f < 1.0)) throw UsageError(prefix + ".f must lie in (0,1)");
    if (!(a.sine_shift >= 0.0 && a.sine_shift <= 1.0))
        throw UsageError(prefix + ".shift must lie in [0,1]");
    return a;
}

SeedRange parse_rot_range(const Config& cfg, const std::string& key, SeedRange def) {
    if (!cfg.has(key)) return def;
    auto [lo, hi] = parse_range(cfg.get_str(key, ""));
    if (!(lo <= hi)) throw UsageError(key + ": lower bound exceeds upper");
    return {lo, hi};
}

void repair_column(double* x, size_t n, const LpSettings& lp, size_t n_corrupt,
                   std::atomic<uint64_t>& fallbacks) {
    size_t train_begin = size_t(std::llround(double(n) * (1.0 - lp.train_fraction)));
    if (train_begin < n_corrupt) train_begin = n_corrupt;
    double peak = 0.0;
    for (size_t i = train_begin; i < n; ++i) peak = std::max(peak, std::abs(x[i]));
    if (peak == 0.0) return;  // silent column, nothing to extend
    for (size_t p : {lp.order, size_t(2)}) {
        if (p < 1 || p > lp.order) continue;
        try {
            LPModel m = fit_backward_lp(x, n, p, train_begin, n);
            if (!repair_initial(x, n, m, n_corrupt)) ++fallbacks;
            return;
        } catch (const Error&) {
            // rank-deficient training window; retry at minimal order
        }
    }
    // no stable model at any order: a zeroed lead-in beats extrapolated garbage
    std::fill(x, x + n_corrupt, 0.0);
    ++fallbacks;
}

} // namespace

void spectrum_1d(const double* x, size_t n_time, const std::vector<double>& window,
                 int zf, SpectrumMode mode, bool apply_phase_rot, double df_hz, double p0,
                 double p1, double p2, double* out) {
    LineKernel k;
    k.init(n_time, zf, mode, df_hz, apply_phase_rot ? p0 : 0.0, apply_phase_rot ? p1 : 0.0,
           apply_phase_rot ? p2 : 0.0, window);
    k.run(x, out);
}

ProcessingConfig parse_processing_config(const Config& cfg) {
    ProcessingConfig pc;
    std::string mode = cfg.get_str("mode", "magnitude");
    if (mode == "magnitude")
        pc.mode = SpectrumMode::magnitude;
    else if (mode == "absorption")
        pc.mode = SpectrumMode::absorption;
    else
        throw UsageError("unknown mode: " + mode + " (magnitude or absorption)");

    pc.apod_h = parse_apod(cfg, "apod_h", pc.apod_h);
    pc.apod_v = parse_apod(cfg, "apod_v", pc.apod_v);

    pc.zerofill_h = int(cfg.get_i64("zerofill_h", -1));
    pc.zerofill_v = int(cfg.get_i64("zerofill_v", -1));
    if (pc.zerofill_h < -1 || pc.zerofill_h > 8 || pc.zerofill_v < -1 || pc.zerofill_v > 8)
        throw UsageError("zerofill counts must lie in 0..8");

    pc.have_phase_h =
        cfg.has("phase_h.c0") || cfg.has("phase_h.c1") || cfg.has("phase_h.c2");
    pc.phase.c0 = cfg.get_f64("phase_h.c0", 0.0);
    pc.phase.c1 = cfg.get_f64("phase_h.c1", 0.0);
    pc.phase.c2 = cfg.get_f64("phase_h.c2", 0.0);
    pc.phase.d0 = cfg.get_f64("phase_v.d0", 0.0);
    pc.phase.d1 = cfg.get_f64("phase_v.d1", 0.0);
    pc.opt.optimize_h = cfg.get_bool("phase_h.optimize", false);
    pc.opt.optimize_v = cfg.get_bool("phase_v.optimize", false);
    pc.opt.rot_c1 = parse_rot_range(cfg, "phase_h.seed_c1", pc.opt.rot_c1);
    pc.opt.rot_c2 = parse_rot_range(cfg, "phase_h.seed_c2", pc.opt.rot_c2);
    pc.opt.rot_d1 = parse_rot_range(cfg, "phase_v.seed_d1", pc.opt.rot_d1);
    long long fit_cols = cfg.get_i64("phase_v.fit_cols", 6);
    if (fit_cols < 1) throw UsageError("phase_v.fit_cols must be at least 1");
    pc.opt.fit_cols = size_t(fit_cols);

    pc.lp.enabled = cfg.get_bool("lp.enabled", false);
    long long order = cfg.get_i64("lp.order", 6);
    if (order < 1 || order > 64) throw UsageError("lp.order must lie in 1..64");
    pc.lp.order = size_t(order);
    std::string nc = cfg.get_str("lp.n_corrupt", "auto");
    if (nc == "auto") {
        pc.lp.n_corrupt = 0;
    } else {
        long long v = cfg.require_i64("lp.n_corrupt");
        if (v < 0) throw UsageError("lp.n_corrupt must be non-negative or auto");
        pc.lp.n_corrupt = size_t(v);
    }
    pc.lp.train_fraction = cfg.get_f64("lp.train_fraction", 0.5);
    if (!(pc.lp.train_fraction > 0.0 && pc.lp.train_fraction <= 1.0))
        throw UsageError("lp.train_fraction must lie in (0,1]");

    pc.denoise.enabled = cfg.get_bool("denoise.enabled", false);
    long long rank = cfg.get_i64("denoise.rank", 20);
    long long iters = cfg.get_i64("denoise.iterations", 1);
    if (pc.denoise.enabled && (rank < 1 || iters < 1))
        throw UsageError("denoise.rank and denoise.iterations must be at least 1");
    pc.denoise.rank = size_t(rank);
    pc.denoise.iterations = size_t(iters);

    long long chunk = cfg.get_i64("chunk_bytes", 64ll << 20);
    if (const char* env = std::getenv("MS2D_CHUNK_BYTES"); env && *env) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (!end || *end) throw UsageError("MS2D_CHUNK_BYTES is not a byte count");
        chunk = (long long)v;
    }
    if (chunk < 4096) chunk = 4096;
    pc.chunk_bytes = size_t(chunk);

    long long threads = cfg.get_i64("threads", 0);
    if (threads < 0) throw UsageError("threads must be non-negative");
    pc.threads = int(threads);

    if (pc.mode == SpectrumMode::absorption && !pc.have_phase_h && !pc.opt.optimize_h)
        throw UsageError("absorption mode requires phase model");
    if (pc.lp.enabled && pc.lp.n_corrupt == 0 && nc == "auto" && !pc.opt.optimize_v &&
        !cfg.has("phase_v.d1"))
        throw UsageError(
            "lp.n_corrupt auto needs a vertical phase model (phase_v.d1 or phase_v.optimize)");

    pc.config_hash = cfg.hash();
    return pc;
}

void process_rows(Dataset& raw, const ProcessingConfig& cfg, const std::string& out_path,
                  PhaseModel& phase) {
    const DatasetMeta& rm = raw.meta();
    if (rm.domain != DomainTag::time_time)
        throw UsageError("row stage expects a time-domain dataset");
    if (kind_width(rm.kind) != 1) throw UsageError("transient rows must be real-valued");
    double rate = 0.0, dt1 = 0.0;
    dataset_timing(raw, rate, dt1, true);

    const size_t n_rows = size_t(rm.n_rows), n_t2 = size_t(rm.n_cols);
    const int zf = cfg.zf_h();
    const size_t pad = n_t2 << size_t(zf);
    if (pad % 2) throw UsageError("row length times zerofill must be even");
    const size_t cols_out = pad / 2;
    const double df = rate / double(pad);
    const bool absorb = cfg.mode == SpectrumMode::absorption;
    const int workers = resolve_threads(cfg.threads);

    std::vector<double> win = make_window(cfg.apod_h, n_t2);
    mem::Tracked win_mem(win.size() * sizeof(double));

    PhaseModel ph = phase;
    if (absorb && cfg.opt.optimize_h) {
        // fit on the strongest transient; per-row energies are partition
        // independent, ties resolve to the lower row
        std::vector<double> energy(n_rows, 0.0);
        parallel_for(n_rows, workers, [&](size_t b, size_t e) {
            std::vector<double> x(n_t2);
            mem::Tracked xm(x.size() * sizeof(double));
            for (size_t i = b; i < e; ++i) {
                raw.read_row(i, x.data());
                double s = 0.0;
                for (size_t j = 0; j < n_t2; ++j) s += x[j] * x[j];
                energy[i] = s;
            }
        });
        size_t best = 0;
        for (size_t i = 1; i < n_rows; ++i)
            if (energy[i] > energy[best]) best = i;

        std::vector<double> x(n_t2);
        raw.read_row(best, x.data());
        if (cfg.denoise.enabled) x = cadzow(x, cfg.denoise);
        apply_window(x.data(), n_t2, win);
        const size_t shift = window_center(win);
        const double slope = 2.0 * kPi * double(shift) / rate;
        std::vector<double> xc(pad);
        std::vector<cplx> s(cols_out);
        std::vector<double> f(cols_out);
        mem::Tracked fit_mem(xc.size() * 8 + s.size() * 16 + f.size() * 8);
        center_record(x.data(), n_t2, shift, xc);
        rfft_half(xc.data(), pad, pad, s.data());
        for (size_t k = 0; k < cols_out; ++k) f[k] = double(k) * df;
        const double bw = rate / 2.0;
        PhaseSeeds seeds;
        seeds.c1 = {2.0 * kPi * cfg.opt.rot_c1.lo / bw + slope,
                    2.0 * kPi * cfg.opt.rot_c1.hi / bw + slope};
        seeds.c2 = {2.0 * kPi * cfg.opt.rot_c2.lo / (bw * bw),
                    2.0 * kPi * cfg.opt.rot_c2.hi / (bw * bw)};
        PhaseFitResult r = optimize_phase_h(s.data(), f.data(), cols_out, seeds);
        ph.c0 = r.c0;
        ph.c1 = r.c1 - slope;
        ph.c2 = r.c2;
    }

    DatasetMeta im;
    im.n_rows = n_rows;
    im.n_cols = cols_out;
    im.kind = ValueKind::f64;
    im.domain = DomainTag::time_freq;
    im.chunk_rows = uint32_t(n_rows);
    im.chunk_cols = uint32_t(stripe_width(cfg.chunk_bytes, n_rows, cols_out));
    im.cal_A_h = rm.cal_A_h;
    im.cal_B_h = rm.cal_B_h;
    im.cal_A_v = rm.cal_A_v;
    im.cal_B_v = rm.cal_B_v;
    im.modulation_offset_hz = rm.modulation_offset_hz;
    im.mode = absorb ? 1 : 0;
    Dataset inter = Dataset::create(out_path, im);

    Config sc;
    sc.set("stage", "rows");
    sc.set("sample_rate_hz", fmt_g(rate));
    sc.set("dt1_s", fmt_g(dt1));
    sc.set("df_h_hz", fmt_g(df));
    sc.set("zerofill_h", std::to_string(zf));
    sc.set("window_h", window_family_name(cfg.apod_h.family));
    sc.set("phase_h.c0", fmt_g(ph.c0));
    sc.set("phase_h.c1", fmt_g(ph.c1));
    sc.set("phase_h.c2", fmt_g(ph.c2));
    write_sidecar(out_path, sc);

    // workers transform a batch of rows; this thread owns all container writes
    const size_t row_bytes = cols_out * sizeof(double);
    const size_t block = std::min(
        n_rows, std::max<size_t>(size_t(workers), cfg.chunk_bytes / std::max<size_t>(row_bytes, 1)));
    std::vector<double> out_block(block * cols_out);
    mem::Tracked block_mem(out_block.size() * sizeof(double));

    for (size_t r0 = 0; r0 < n_rows; r0 += block) {
        const size_t nb = std::min(block, n_rows - r0);
        parallel_for(nb, workers, [&](size_t b, size_t e) {
            LineKernel k;
            k.init(n_t2, zf, cfg.mode, df, ph.c0, ph.c1, ph.c2, win);
            std::vector<double> x(n_t2);
            mem::Tracked xm(x.size() * sizeof(double));
            for (size_t i = b; i < e; ++i) {
                raw.read_row(r0 + i, x.data());
                if (cfg.denoise.enabled) {
                    std::vector<double> d = cadzow(x, cfg.denoise);
                    std::copy(d.begin(), d.end(), x.begin());
                }
                k.run(x.data(), &out_block[i * cols_out]);
            }
        });
        for (size_t i = 0; i < nb; ++i) inter.write_row(r0 + i, &out_block[i * cols_out]);
    }
    inter.flush();
    phase = ph;
}

ProcessResult process_cols(Dataset& inter, const ProcessingConfig& cfg,
                           const std::string& out_path, PhaseModel& phase) {
    const DatasetMeta& im = inter.meta();
    if (im.domain != DomainTag::time_freq)
        throw UsageError("column stage expects a row-transformed dataset");
    if (kind_width(im.kind) != 1) throw UsageError("column stage expects real samples");
    double rate = 0.0, dt1 = 0.0;
    dataset_timing(inter, rate, dt1, false);

    const size_t n_rows = size_t(im.n_rows), n_cols = size_t(im.n_cols);
    const int zf = cfg.zf_v();
    const size_t pad = n_rows << size_t(zf);
    if (pad % 2) throw UsageError("column length times zerofill must be even");
    const size_t rows_out = pad / 2;
    const double bw_v = 0.5 / dt1;
    const double dv = (1.0 / dt1) / double(pad);
    const bool absorb = cfg.mode == SpectrumMode::absorption;
    const int workers = resolve_threads(cfg.threads);

    std::vector<double> win = make_window(cfg.apod_v, n_rows);
    mem::Tracked win_mem(win.size() * sizeof(double));

    PhaseModel ph = phase;
    ph.v_bandwidth_hz = bw_v;

    const size_t stripe = stripe_width(cfg.chunk_bytes, n_rows, n_cols);

    if (cfg.opt.optimize_v) {
        // pass A: score columns in one sequential sweep (order fixed per
        // column, so worker count cannot perturb the selection), then fit the
        // vertical model on the summed strongest columns
        std::vector<double> score(n_cols, 0.0);
        {
            std::vector<double> buf(n_rows * stripe);
            mem::Tracked bm(buf.size() * sizeof(double) + score.size() * sizeof(double));
            for (size_t c0 = 0; c0 < n_cols; c0 += stripe) {
                const size_t w = std::min(stripe, n_cols - c0);
                inter.read_block(0, c0, n_rows, w, buf.data());
                for (size_t j = 0; j < w; ++j) {
                    double s = 0.0;
                    for (size_t r = 0; r < n_rows; ++r) s += std::abs(buf[r * w + j]);
                    score[c0 + j] = s;
                }
            }
        }
        std::vector<size_t> order(n_cols);
        std::iota(order.begin(), order.end(), size_t(0));
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        });
        std::vector<size_t> picked;
        for (size_t i = 0; i < order.size() && picked.size() < cfg.opt.fit_cols; ++i)
            if (score[order[i]] > 0.0) picked.push_back(order[i]);
        if (picked.empty()) throw Error("no signal columns for the vertical phase fit");
        std::sort(picked.begin(), picked.end());

        std::atomic<uint64_t> scratch_trips{0};
        std::vector<std::vector<cplx>> scans;
        std::vector<double> col(n_rows);
        const size_t shift = window_center(win);
        const double slope = 2.0 * kPi * double(shift) * dt1;
        std::vector<double> cent(pad);
        mem::Tracked fit_mem((picked.size() * rows_out) * sizeof(cplx) +
                             (col.size() + cent.size()) * sizeof(double));
        for (size_t idx : picked) {
            inter.read_col(idx, col.data());
            if (cfg.lp.enabled && cfg.lp.n_corrupt > 0)
                repair_column(col.data(), n_rows, cfg.lp, cfg.lp.n_corrupt, scratch_trips);
            // the modulation pedestal is constant along t1; removing the mean
            // keeps the zero-frequency ridge out of the anchor list
            double mean = std::accumulate(col.begin(), col.end(), 0.0) / double(n_rows);
            for (double& v : col) v -= mean;
            apply_window(col.data(), n_rows, win);
            center_record(col.data(), n_rows, shift, cent);
            std::vector<cplx> s(rows_out);
            rfft_half(cent.data(), pad, pad, s.data());
            scans.push_back(std::move(s));
        }
        std::vector<double> f(rows_out);
        for (size_t r = 0; r < rows_out; ++r) f[r] = double(r) * dv;
        PhaseSeeds seeds;
        seeds.c1 = {2.0 * kPi * cfg.opt.rot_d1.lo / bw_v + slope,
                    2.0 * kPi * cfg.opt.rot_d1.hi / bw_v + slope};
        PhaseFitResult r = optimize_phase_v(scans, f.data(), rows_out, seeds);
        ph.d0 = r.c0;
        ph.d1 = r.c1 - slope;
    }

    size_t n_corrupt = cfg.lp.n_corrupt;
    if (cfg.lp.enabled && n_corrupt == 0)
        n_corrupt = estimate_n_corrupt(ph.v_rotations(), n_rows);
    if (n_corrupt >= n_rows) throw UsageError("lp.n_corrupt exceeds the column length");

    DatasetMeta om;
    om.n_rows = rows_out;
    om.n_cols = n_cols;
    om.kind = ValueKind::f64;
    om.domain = DomainTag::freq_freq;
    // canonical output chunking: identical processing must yield identical
    // files whatever the working budget was
    om.chunk_rows = uint32_t(std::min<size_t>(rows_out, 256));
    om.chunk_cols = uint32_t(std::min<size_t>(n_cols, 512));
    om.cal_A_h = im.cal_A_h;
    om.cal_B_h = im.cal_B_h;
    om.cal_A_v = im.cal_A_v;
    om.cal_B_v = im.cal_B_v;
    om.modulation_offset_hz = im.modulation_offset_hz;
    om.mode = absorb ? 1 : 0;
    Dataset out = Dataset::create(out_path, om);

    // pass B: full-height stripes, columns transformed in parallel, all
    // container writes on this thread
    std::atomic<uint64_t> lp_fallbacks{0};
    {
        std::vector<double> in_buf(n_rows * stripe), out_buf(rows_out * stripe);
        mem::Tracked bm((in_buf.size() + out_buf.size()) * sizeof(double));
        for (size_t c0 = 0; c0 < n_cols; c0 += stripe) {
            const size_t w = std::min(stripe, n_cols - c0);
            inter.read_block(0, c0, n_rows, w, in_buf.data());
            parallel_for(w, workers, [&](size_t b, size_t e) {
                LineKernel k;
                k.init(n_rows, zf, cfg.mode, dv, ph.d0, ph.d1, 0.0, win);
                std::vector<double> x(n_rows), y(rows_out);
                mem::Tracked xm((x.size() + y.size()) * sizeof(double));
                for (size_t j = b; j < e; ++j) {
                    for (size_t r = 0; r < n_rows; ++r) x[r] = in_buf[r * w + j];
                    if (cfg.lp.enabled && n_corrupt > 0)
                        repair_column(x.data(), n_rows, cfg.lp, n_corrupt, lp_fallbacks);
                    k.run(x.data(), y.data());
                    for (size_t r = 0; r < rows_out; ++r) out_buf[r * w + j] = y[r];
                }
            });
            out.write_block(0, c0, rows_out, w, out_buf.data());
        }
    }
    out.flush();

    double df_h = 0.0;
    if (sidecar_exists(inter.path()))
        df_h = read_sidecar(inter.path()).get_f64("df_h_hz", 0.0);
    if (df_h <= 0.0 && rate > 0.0) df_h = rate / double(2 * n_cols);

    Config sc;
    sc.set("stage", "spectrum");
    sc.set("mode", absorb ? "absorption" : "magnitude");
    if (rate > 0.0) sc.set("sample_rate_hz", fmt_g(rate));
    sc.set("dt1_s", fmt_g(dt1));
    if (df_h > 0.0) sc.set("df_h_hz", fmt_g(df_h));
    sc.set("df_v_hz", fmt_g(dv));
    sc.set("zerofill_v", std::to_string(zf));
    sc.set("window_h", window_family_name(cfg.apod_h.family));
    sc.set("window_v", window_family_name(cfg.apod_v.family));
    sc.set("phase_h.c0", fmt_g(ph.c0));
    sc.set("phase_h.c1", fmt_g(ph.c1));
    sc.set("phase_h.c2", fmt_g(ph.c2));
    sc.set("phase_v.d0", fmt_g(ph.d0));
    sc.set("phase_v.d1", fmt_g(ph.d1));
    sc.set("v_bandwidth_hz", fmt_g(bw_v));
    sc.set("lp.enabled", cfg.lp.enabled ? "true" : "false");
    if (cfg.lp.enabled) {
        sc.set("lp.n_corrupt_used", std::to_string(n_corrupt));
        sc.set("lp.fallback_columns", std::to_string(lp_fallbacks.load()));
    }
    char hh[24];
    std::snprintf(hh, sizeof hh, "%016llx", (unsigned long long)cfg.config_hash);
    sc.set("config_hash", hh);
    write_sidecar(out_path, sc);

    ProcessResult res;
    res.path = out_path;
    res.meta = out.meta();
    res.phase = ph;
    res.n_rows = rows_out;
    res.n_cols = n_cols;
    res.sample_rate_hz = rate;
    res.dt1_s = dt1;
    phase = ph;
    return res;
}

ProcessResult process_2d(const std::string& raw_header, const ProcessingConfig& cfg,
                         const std::string& out_path) {
    Dataset raw = Dataset::open_raw(raw_header);
    const std::string inter_path = out_path + ".rows.tmp";
    PhaseModel ph = cfg.phase;
    process_rows(raw, cfg, inter_path, ph);
    ProcessResult res;
    {
        Dataset inter = Dataset::open(inter_path);
        res = process_cols(inter, cfg, out_path, ph);
    }
    fs::remove(inter_path);
    fs::remove(inter_path + ".meta");
    return res;
}

} // namespace ms2d
