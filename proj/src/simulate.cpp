#include "ms2d/simulate.hpp"

#include "ms2d/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace ms2d {

namespace {

constexpr double kPi = 3.14159265358979323846;

/** Distinct "precursorN." indices present in the config, sorted. */
std::vector<int> precursor_indices(const Config& cfg) {
    std::vector<int> idx;
    for (auto& key : cfg.keys_with_prefix("precursor")) {
        size_t dot = key.find('.');
        if (dot == std::string::npos) continue;
        std::string num = key.substr(9, dot - 9);
        if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
            continue;
        int v = std::stoi(num);
        if (std::find(idx.begin(), idx.end(), v) == idx.end()) idx.push_back(v);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

/** Parses "mz:yield, mz:yield, ..." (yield optional, default 1). */
std::vector<SimFragment> parse_fragments(const std::string& text) {
    std::vector<SimFragment> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        size_t a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        size_t b = item.find_last_not_of(" \t");
        item = item.substr(a, b - a + 1);
        SimFragment f;
        size_t colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                f.mz = std::stod(item);
            } else {
                f.mz = std::stod(item.substr(0, colon));
                f.yield = std::stod(item.substr(colon + 1));
            }
        } catch (const std::exception&) {
            throw UsageError("bad fragment entry: '" + item + "'");
        }
        out.push_back(f);
    }
    return out;
}

} // namespace

double SimSpec::modulation_freq(const SimPrecursor& p) const {
    Calibration c = cal;
    c.modulation_offset = modulation_offset;
    return mz_to_freq(p.mz, c);
}

double SimSpec::horizontal_freq(double mz) const {
    Calibration c = cal;
    c.modulation_offset = 0.0;
    return mz_to_freq(mz, c);
}

SimSpec parse_sim_spec(const Config& cfg) {
    SimSpec s;
    s.n_t1 = uint64_t(cfg.require_i64("n_t1"));
    s.n_t2 = uint64_t(cfg.require_i64("n_t2"));
    s.dt1 = cfg.require_f64("dt1_s");
    s.sample_rate = cfg.require_f64("sample_rate_hz");
    s.tau = cfg.require_f64("tau_s");
    if (s.n_t1 < 2 || s.n_t2 < 2) throw UsageError("grid must be at least 2 x 2");
    if (s.dt1 <= 0 || s.sample_rate <= 0) throw UsageError("timing must be positive");
    if (s.tau <= 0) throw UsageError("decay constant must be positive");

    std::string enc = cfg.get_str("encoding", "f32le");
    if (enc == "f32le")
        s.encoding = RawEncoding::f32le;
    else if (enc == "i32le")
        s.encoding = RawEncoding::i32le;
    else
        throw UsageError("unknown encoding: " + enc);

    // default calibration puts m/z 2500 at 92.2 kHz with no quadratic term
    s.cal.A = cfg.get_f64("cal_a_hz_th", 92.2e3 * 2500.0);
    s.cal.B = cfg.get_f64("cal_b_hz2_th", 0.0);
    s.modulation_offset = cfg.get_f64("modulation_offset_hz", 0.0);
    if (s.cal.A <= 0) throw UsageError("calibration A must be positive");

    s.c0 = cfg.get_f64("phase_h.c0", 0.0);
    s.c1 = cfg.get_f64("phase_h.c1", 0.0);
    s.c2 = cfg.get_f64("phase_h.c2", 0.0);
    s.d0 = cfg.get_f64("phase_v.d0", 0.0);
    s.d1 = cfg.get_f64("phase_v.d1", 0.0);
    s.noise_sigma = cfg.get_f64("noise_sigma", 0.0);
    s.scintillation = cfg.get_f64("scintillation", 0.0);
    if (s.noise_sigma < 0 || s.scintillation < 0)
        throw UsageError("noise levels must be nonnegative");
    s.seed = uint64_t(cfg.get_i64("seed", 1));

    for (int idx : precursor_indices(cfg)) {
        std::string p = "precursor" + std::to_string(idx) + ".";
        SimPrecursor pre;
        pre.mz = cfg.require_f64(p + "mz");
        pre.abundance = cfg.get_f64(p + "abundance", 1.0);
        pre.residual = cfg.get_f64(p + "residual", 0.0);
        pre.mod_phase = cfg.get_f64(p + "phase", 0.0);
        pre.harmonic2 = cfg.get_f64(p + "harmonic2", 0.0);
        pre.fragments = parse_fragments(cfg.get_str(p + "fragments", ""));
        if (pre.mz <= 0) throw UsageError(p + "mz must be positive");
        if (pre.abundance < 0 || pre.residual < 0)
            throw UsageError(p + "abundance and residual must be nonnegative");
        for (auto& f : pre.fragments)
            if (f.mz <= 0 || f.yield < 0)
                throw UsageError(p + "fragments entries must have positive m/z");
        s.precursors.push_back(std::move(pre));
    }

    // band checks: every modulation inside the vertical Nyquist band, every
    // detected line inside the horizontal one
    for (size_t i = 0; i < s.precursors.size(); ++i) {
        auto& pre = s.precursors[i];
        double nu = s.modulation_freq(pre);
        if (nu <= 0 || nu >= s.vertical_nyquist_hz())
            throw UsageError("precursor " + std::to_string(i + 1) +
                             " modulation outside the vertical band");
        if (pre.residual > 0) {
            double fh = s.horizontal_freq(pre.mz);
            if (fh <= 0 || fh >= s.sample_rate / 2)
                throw UsageError("precursor " + std::to_string(i + 1) +
                                 " line outside the horizontal band");
        }
        for (auto& f : pre.fragments) {
            double fh = s.horizontal_freq(f.mz);
            if (fh <= 0 || fh >= s.sample_rate / 2)
                throw UsageError("fragment m/z " + std::to_string(f.mz) +
                                 " outside the horizontal band");
        }
    }
    return s;
}

GroundTruth ground_truth(const SimSpec& spec) {
    GroundTruth gt;
    gt.df_h = spec.sample_rate / (2.0 * double(spec.n_t2));
    gt.df_v = (1.0 / spec.dt1) / (2.0 * double(spec.n_t1));
    for (size_t i = 0; i < spec.precursors.size(); ++i) {
        auto& pre = spec.precursors[i];
        double nu = spec.modulation_freq(pre);
        auto add = [&](double mz_h, double height, bool self) {
            TruthPeak t;
            t.precursor = i;
            t.self_term = self;
            t.mz_h = mz_h;
            t.mz_v = pre.mz;
            t.f_h = spec.horizontal_freq(mz_h);
            t.nu_v = nu;
            t.col = size_t(std::llround(t.f_h / gt.df_h));
            t.row = size_t(std::llround(t.nu_v / gt.df_v));
            t.rel_height = height;
            gt.peaks.push_back(t);
        };
        for (auto& f : pre.fragments) add(f.mz, pre.abundance * f.yield, false);
        if (pre.residual > 0) add(pre.mz, pre.abundance * pre.residual, true);
    }
    std::sort(gt.peaks.begin(), gt.peaks.end(), [](const TruthPeak& a, const TruthPeak& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return gt;
}

void write_ground_truth_csv(const GroundTruth& gt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "precursor,kind,mz_h,mz_v,f_h_hz,nu_v_hz,col,row,rel_height\n";
    char line[256];
    for (auto& t : gt.peaks) {
        std::snprintf(line, sizeof line, "%zu,%s,%.10g,%.10g,%.10g,%.10g,%zu,%zu,%.10g\n",
                      t.precursor + 1, t.self_term ? "self" : "cross", t.mz_h, t.mz_v,
                      t.f_h, t.nu_v, t.col, t.row, t.rel_height);
        out << line;
    }
    if (!out.flush()) throw Error("failed writing " + path);
}

void synth_row(const SimSpec& spec, uint64_t row, double* out) {
    const size_t n = spec.n_t2;
    std::fill(out, out + n, 0.0);
    const double t1 = double(row) * spec.dt1;

    for (auto& pre : spec.precursors) {
        double nu = spec.modulation_freq(pre);
        double arg = 2.0 * kPi * nu * t1 + pre.mod_phase + spec.d0 + spec.d1 * nu;
        double mod = 0.5 * (1.0 + std::cos(arg) + pre.harmonic2 * std::cos(2.0 * arg));
        auto add_line = [&](double mz, double amp) {
            if (amp == 0.0) return;
            double fh = spec.horizontal_freq(mz);
            double ph = spec.c0 + (spec.c1 + spec.c2 * fh) * fh;
            double w = 2.0 * kPi * fh / spec.sample_rate;
            for (size_t j = 0; j < n; ++j) {
                double t2 = double(j) / spec.sample_rate;
                out[j] += amp * std::cos(w * double(j) + ph) * std::exp(-t2 / spec.tau);
            }
        };
        for (auto& f : pre.fragments) add_line(f.mz, pre.abundance * f.yield * mod);
        if (pre.residual > 0) add_line(pre.mz, pre.abundance * pre.residual * mod);
    }

    if (spec.noise_sigma > 0 || spec.scintillation > 0) {
        GaussRng g(row_seed(spec.seed, row));
        // multiplicative term first, while out still holds the clean signal
        if (spec.scintillation > 0)
            for (size_t j = 0; j < n; ++j)
                out[j] += spec.scintillation * std::abs(out[j]) * g.next();
        if (spec.noise_sigma > 0)
            for (size_t j = 0; j < n; ++j) out[j] += spec.noise_sigma * g.next();
    }
}

std::string synthesize(const SimSpec& spec, const std::string& dir, int threads) {
    AcquisitionParams p;
    p.n_t1 = spec.n_t1;
    p.n_t2 = spec.n_t2;
    p.dt1_s = spec.dt1;
    p.sample_rate_hz = spec.sample_rate;
    p.encoding = spec.encoding;
    p.cal_a = spec.cal.A;
    p.cal_b = spec.cal.B;
    p.modulation_offset = spec.modulation_offset;
    RawWriter writer(dir, p);

    // generate in blocks: workers fill disjoint rows of the block buffer,
    // then rows are appended in order so bytes never depend on thread count
    int nw = resolve_threads(threads);
    const uint64_t block = std::max<uint64_t>(1, std::min<uint64_t>(spec.n_t1, 16));
    std::vector<double> buf(block * spec.n_t2);
    for (uint64_t r0 = 0; r0 < spec.n_t1; r0 += block) {
        uint64_t nb = std::min(block, spec.n_t1 - r0);
        parallel_for(nb, nw, [&](size_t lo, size_t hi) {
            for (size_t i = lo; i < hi; ++i)
                synth_row(spec, r0 + i, buf.data() + i * spec.n_t2);
        });
        for (uint64_t i = 0; i < nb; ++i) writer.append_row(buf.data() + i * spec.n_t2);
    }
    writer.finish();

    write_ground_truth_csv(ground_truth(spec), (fs::path(dir) / "ground_truth.csv").string());
    return writer.header_path();
}

} // namespace ms2d
