#include "ms2d/phase.hpp"

#include "ms2d/common.hpp"
#include "ms2d/peakdet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ms2d {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double x) { return std::remainder(x, 2.0 * kPi); }

struct Anchor {
    double pos = 0.0;     // fractional bin of the magnitude centroid
    double f = 0.0;       // Hz at the centroid
    cplx acc{};           // spectrum summed over a symmetric window at the line
    double theta = 0.0;   // arg(acc), the line phase estimate
    double height = 0.0;  // magnitude height
    size_t lo = 0, hi = 0;  // penalty window [lo, hi), +-3 FWHM
};

// Magnitude peaks serve as phase anchors. The first few bins are excluded:
// the vertical dimension carries an unmodulated baseline ridge at zero
// frequency whose phase does not follow the aberration model.
std::vector<Anchor> find_anchors(const cplx* spec, const double* freq, size_t n,
                                 size_t min_peaks, double span_frac) {
    if (n < 16) throw UsageError("spectrum too short for phase fitting");
    // 3-tap raised-cosine convolution. In the time domain this tapers the
    // record with 1 + cos(pi t / T), which vanishes at the fold point of a
    // twofold zero-filled transform, so the truncation ripple of weakly
    // damped lines never reaches the anchor integrals. Line phases are
    // untouched (the implied taper is real).
    std::vector<cplx> sm(n);
    sm[0] = spec[0];
    sm[n - 1] = spec[n - 1];
    for (size_t i = 1; i + 1 < n; ++i)
        sm[i] = 0.5 * spec[i - 1] + spec[i] + 0.5 * spec[i + 1];
    std::vector<double> mag(n);
    for (size_t i = 0; i < n; ++i) mag[i] = std::abs(sm[i]);
    double sigma = noise_sigma_mad(mag.data(), n);
    double thresh = 6.0 * sigma;
    size_t guard = std::max<size_t>(8, n / 256);

    auto peaks = find_peaks_1d(mag.data(), n, thresh);
    std::sort(peaks.begin(), peaks.end(),
              [](const RawPeak& a, const RawPeak& b) { return a.height > b.height; });

    // suppress anything close to a taller peak: window sidelobes would anchor
    // the fit with inverted phases. Peaks inside the guard zone still shadow
    // (the baseline ridge suppresses its own skirt) but are never kept.
    std::vector<RawPeak> shadows, kept;
    double floor = 0.0;
    for (auto& p : peaks) {
        bool shadowed = false;
        for (auto& k : shadows) {
            double sep = 3.0 * std::max({k.fwhm, p.fwhm, 4.0});
            if (std::abs(k.centroid - p.centroid) < sep) {
                shadowed = true;
                break;
            }
        }
        if (shadowed) continue;
        shadows.push_back(p);
        if (p.index < guard) continue;
        if (floor == 0.0) floor = 0.08 * p.height;  // leakage skirts sit well below this
        if (p.height < floor) continue;
        kept.push_back(p);
        if (kept.size() == 24) break;
    }

    if (kept.size() < min_peaks)
        throw Error("too few peaks for phase optimization: found " +
                    std::to_string(kept.size()) + ", need " + std::to_string(min_peaks));
    if (span_frac > 0.0 && kept.size() >= 2) {
        auto [mn, mx] = std::minmax_element(
            kept.begin(), kept.end(),
            [](const RawPeak& a, const RawPeak& b) { return a.centroid < b.centroid; });
        double span = (mx->centroid - mn->centroid) / double(n - 1);
        if (span < span_frac)
            throw Error("too few peaks for phase optimization: anchors span " +
                        std::to_string(span * 100.0) + "% of the band");
    }

    double df = n > 1 ? (freq[n - 1] - freq[0]) / double(n - 1) : 0.0;
    std::vector<Anchor> out;
    out.reserve(kept.size());
    for (auto& p : kept) {
        Anchor a;
        a.pos = p.centroid;
        a.f = freq[0] + p.centroid * df;
        // integral phase over a window symmetric about the fractional
        // centroid: the dispersive part of the line is odd there and cancels,
        // so the estimate avoids the ~0.03 rad bias a point phase or a
        // bin-aligned boxcar carries. Edge bins enter with their covered
        // fraction, and a flanking-ring average is subtracted to strip the
        // slowly varying tails of neighboring lines and the negative-
        // frequency image, which the core symmetry cannot cancel.
        {
            double w = std::max(2.0, 1.5 * (p.fwhm > 0 ? p.fwhm : 4.0));
            auto frac_sum = [&](double lo, double hi, double& wsum) {
                long k0 = std::max<long>(0, long(std::floor(lo + 0.5)));
                long k1 = std::min<long>(long(n) - 1, long(std::ceil(hi - 0.5)));
                cplx acc{};
                wsum = 0.0;
                for (long k = k0; k <= k1; ++k) {
                    double cov =
                        std::min(hi, double(k) + 0.5) - std::max(lo, double(k) - 0.5);
                    if (cov > 0) {
                        acc += cov * sm[size_t(k)];
                        wsum += cov;
                    }
                }
                return acc;
            };
            double wb, wl, wr;
            cplx box = frac_sum(p.centroid - w, p.centroid + w, wb);
            cplx ring = frac_sum(p.centroid - 2.0 * w, p.centroid - w, wl) +
                        frac_sum(p.centroid + w, p.centroid + 2.0 * w, wr);
            cplx acc = box;
            if (wl + wr > 0) acc -= wb * ring / (wl + wr);
            a.acc = acc == cplx{} ? complex_at(spec, n, p.centroid) : acc;
            a.theta = std::arg(a.acc);
        }
        a.height = p.height;
        double w = p.fwhm > 0 ? p.fwhm : 4.0;
        double lo = p.centroid - 3.0 * w;
        double hi = p.centroid + 3.0 * w;
        a.lo = lo <= 0 ? 0 : size_t(lo);
        a.hi = std::min(n, size_t(std::max(0.0, hi)) + 1);
        out.push_back(a);
    }
    return out;
}

// Pinned figure of merit: summed corrected real heights at the anchors minus
// the summed negative real excursions inside each anchor's +-3 FWHM window.
// Stored negated so smaller is better. Heights enter via the same symmetric
// window sums as the anchor phases, so the score term peaks exactly where
// each line's phase is cancelled rather than at an interpolation artifact.
struct Objective {
    const cplx* spec;
    const double* freq;
    size_t n;
    const std::vector<Anchor>& anchors;

    double operator()(double c0, double c1, double c2) const {
        double score = 0.0;
        for (const auto& a : anchors) {
            double phi = c0 + (c1 + c2 * a.f) * a.f;
            score += a.acc.real() * std::cos(phi) + a.acc.imag() * std::sin(phi);
        }
        double neg = 0.0;
        for (const auto& a : anchors) {
            for (size_t k = a.lo; k < a.hi; ++k) {
                double f = freq[k];
                double phi = c0 + (c1 + c2 * f) * f;
                double re = spec[k].real() * std::cos(phi) + spec[k].imag() * std::sin(phi);
                if (re < 0) neg -= re;
            }
        }
        return -(score - neg);
    }
};

struct Candidate {
    double c0 = 0, c1 = 0, c2 = 0;
    double coh = -1.0;
};

// Coherence scan: on the anchor phases alone, find (c1, c2) making
// theta_j - c1 f_j - c2 f_j^2 line up mod 2 pi. The c1 axis is swept with
// incremental per-anchor rotators, so each grid point costs one complex
// multiply-add per anchor.
std::vector<Candidate> coherence_scan(const std::vector<Anchor>& anchors, double f_max,
                                      const PhaseSeeds& seeds, bool quadratic) {
    const double res = kPi / 3.0;  // max per-anchor phase change per grid step
    double dc1 = res / f_max;
    double dc2 = res / (f_max * f_max);

    auto axis = [](SeedRange r, double step, size_t cap) {
        if (r.hi < r.lo) std::swap(r.lo, r.hi);
        size_t npts = size_t((r.hi - r.lo) / step) + 1;
        if (npts > cap) npts = cap;
        double actual = npts > 1 ? (r.hi - r.lo) / double(npts - 1) : 0.0;
        return std::pair<size_t, double>(npts, actual);
    };
    auto [n1, s1] = axis(seeds.c1, dc1, 60001);
    auto [n2, s2] = quadratic ? axis(seeds.c2, dc2, 20001)
                              : std::pair<size_t, double>(1, 0.0);

    const size_t m = anchors.size();
    std::vector<cplx> base(m), rot(m), stepr(m);
    for (size_t j = 0; j < m; ++j)
        stepr[j] = std::polar(1.0, -s1 * anchors[j].f);

    // rank by coherence; break near-ties toward the smallest coefficients so
    // degenerate anchor sets (fewer anchors than parameters) settle on the
    // least-rotating interpolant
    auto better = [f_max](const Candidate& a, const Candidate& b) {
        if (std::abs(a.coh - b.coh) > 1e-9) return a.coh > b.coh;
        double na = std::abs(a.c1) * f_max + std::abs(a.c2) * f_max * f_max;
        double nb = std::abs(b.c1) * f_max + std::abs(b.c2) * f_max * f_max;
        return na < nb;
    };

    std::vector<Candidate> top;
    auto offer = [&](const Candidate& c) {
        for (auto& t : top) {
            if (std::abs(t.c1 - c.c1) < 3.5 * std::max(s1, dc1 * 1e-12) &&
                std::abs(t.c2 - c.c2) < 3.5 * std::max(s2, dc2 * 1e-12)) {
                if (better(c, t)) t = c;
                return;
            }
        }
        top.push_back(c);
        if (top.size() > 160) {
            std::sort(top.begin(), top.end(), better);
            top.resize(80);
        }
    };

    double best_floor = -1.0;
    for (size_t i2 = 0; i2 < n2; ++i2) {
        double c2 = quadratic ? std::min(seeds.c2.lo, seeds.c2.hi) + double(i2) * s2 : 0.0;
        double c1lo = std::min(seeds.c1.lo, seeds.c1.hi);
        for (size_t j = 0; j < m; ++j) {
            const Anchor& a = anchors[j];
            rot[j] = std::polar(1.0, a.theta - (c1lo + c2 * a.f) * a.f);
        }
        for (size_t i1 = 0; i1 < n1; ++i1) {
            cplx s{};
            for (size_t j = 0; j < m; ++j) s += rot[j];
            double coh = std::abs(s);
            if (coh > 0.55 * double(m) && coh > best_floor * 0.8) {
                Candidate c;
                c.c1 = c1lo + double(i1) * s1;
                c.c2 = c2;
                c.c0 = std::arg(s);
                c.coh = coh;
                offer(c);
                best_floor = std::max(best_floor, coh);
            }
            for (size_t j = 0; j < m; ++j) rot[j] *= stepr[j];
        }
    }
    if (top.empty()) {
        // nothing coherent in range: seed from the range midpoints
        Candidate c;
        c.c1 = 0.5 * (seeds.c1.lo + seeds.c1.hi);
        c.c2 = quadratic ? 0.5 * (seeds.c2.lo + seeds.c2.hi) : 0.0;
        c.c0 = 0.0;
        c.coh = 0.0;
        top.push_back(c);
    }
    std::sort(top.begin(), top.end(), better);
    if (top.size() > 12) top.resize(12);
    return top;
}

// Nelder-Mead in band-scaled units u = (c0, c1 fmax, c2 fmax^2); converged
// when the simplex diameter, measured as worst-case phase difference across
// the band, drops under 1e-4 rad. `dim` < 3 freezes the trailing parameters
// at their start values: refinement is local to the seeded candidate, whose
// grid already resolved the frozen directions.
template <typename Fn>
std::pair<std::array<double, 3>, double> nelder_mead(Fn&& fn, std::array<double, 3> start,
                                                     int dim) {
    std::vector<std::array<double, 3>> v(dim + 1, start);
    std::vector<double> fv(dim + 1);
    for (int i = 0; i < dim; ++i) v[i + 1][i] += 0.35;
    for (int i = 0; i <= dim; ++i) fv[i] = fn(v[i]);

    auto order = [&] {
        for (int i = 0; i <= dim; ++i)
            for (int j = i + 1; j <= dim; ++j)
                if (fv[j] < fv[i]) {
                    std::swap(fv[i], fv[j]);
                    std::swap(v[i], v[j]);
                }
    };
    auto diameter = [&] {
        double d = 0;
        for (int i = 0; i <= dim; ++i)
            for (int j = i + 1; j <= dim; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += std::abs(v[i][k] - v[j][k]);
                d = std::max(d, s);
            }
        return d;
    };

    for (int it = 0; it < 600; ++it) {
        order();
        if (diameter() < 1e-4) break;
        std::array<double, 3> cen{0, 0, 0};
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < 3; ++k) cen[k] += v[i][k] / double(dim);
        auto mix = [&](double t) {
            std::array<double, 3> p = cen;
            for (int k = 0; k < 3; ++k) p[k] += t * (cen[k] - v[dim][k]);
            return p;
        };
        auto pr = mix(1.0);
        double fr = fn(pr);
        if (fr < fv[0]) {
            auto pe = mix(2.0);
            double fe = fn(pe);
            if (fe < fr) {
                v[dim] = pe;
                fv[dim] = fe;
            } else {
                v[dim] = pr;
                fv[dim] = fr;
            }
        } else if (fr < fv[dim - 1]) {
            v[dim] = pr;
            fv[dim] = fr;
        } else {
            auto pc = mix(fr < fv[dim] ? 0.5 : -0.5);
            double fc = fn(pc);
            if (fc < std::min(fr, fv[dim])) {
                v[dim] = pc;
                fv[dim] = fc;
            } else {
                for (int i = 1; i <= dim; ++i) {
                    for (int k = 0; k < 3; ++k) v[i][k] = v[0][k] + 0.5 * (v[i][k] - v[0][k]);
                    fv[i] = fn(v[i]);
                }
            }
        }
    }
    order();
    return {v[0], fv[0]};
}

PhaseFitResult fit_poly_phase(const cplx* spec, const double* freq, size_t n,
                              const PhaseSeeds& seeds, bool quadratic, size_t min_peaks,
                              double span_frac) {
    auto anchors = find_anchors(spec, freq, n, min_peaks, span_frac);
    double f_max = std::max(std::abs(freq[0]), std::abs(freq[n - 1]));
    if (f_max <= 0) throw UsageError("degenerate frequency axis");
    Objective obj{spec, freq, n, anchors};
    auto cands = coherence_scan(anchors, f_max, seeds, quadratic);

    // with fewer anchors than parameters the refinement directions beyond the
    // anchor count are unconstrained valleys; they stay at the seed value,
    // which the scan's tie-break already chose minimal
    int dim = std::min<int>(quadratic ? 3 : 2, int(anchors.size()));

    double best_f = 0;
    std::array<double, 3> best_u{0, 0, 0};
    bool have = false;
    for (auto& c : cands) {
        std::array<double, 3> u{c.c0, c.c1 * f_max, c.c2 * f_max * f_max};
        // kept local: far from the seed the anchor-phase landscape is a comb
        // of aliases, and the window-twist penalty slopes toward small
        // coefficients through all of them
        auto fn = [&](const std::array<double, 3>& p) {
            for (int k = 0; k < 3; ++k)
                if (std::abs(p[k] - u[k]) > 2.5) return 1e30;
            return obj(p[0], p[1] / f_max, p[2] / (f_max * f_max));
        };
        auto [u_opt, f_opt] = nelder_mead(fn, u, dim);
        if (!std::isfinite(f_opt)) continue;
        // near-equal objectives (degenerate valleys) resolve to the smallest
        // coefficients, matching the seeding stage's tie-break
        bool take = !have || f_opt < best_f - 1e-9 * (std::abs(best_f) + 1.0);
        if (!take && have && f_opt < best_f + 1e-9 * (std::abs(best_f) + 1.0)) {
            double nn = std::abs(u_opt[1]) + std::abs(u_opt[2]);
            double nb = std::abs(best_u[1]) + std::abs(best_u[2]);
            take = nn < nb;
        }
        if (take) {
            best_f = f_opt;
            best_u = u_opt;
            have = true;
        }
    }
    if (!have) throw Error("phase optimizer produced no finite objective");

    PhaseFitResult r;
    r.c0 = wrap_pi(best_u[0]);
    r.c1 = best_u[1] / f_max;
    r.c2 = quadratic ? best_u[2] / (f_max * f_max) : 0.0;
    r.objective = best_f;
    r.n_peaks = anchors.size();

    // with fewer anchors than coefficients the solution is an equivalence
    // class on the anchor phases; report its minimal-coefficient member, the
    // degree m-1 interpolant through the fitted anchor phases
    size_t m = anchors.size();
    if (m == 1) {
        r.c0 = wrap_pi(r.c0 + (r.c1 + r.c2 * anchors[0].f) * anchors[0].f);
        r.c1 = 0.0;
        r.c2 = 0.0;
        r.objective = obj(r.c0, 0.0, 0.0);
    } else if (m == 2 && quadratic) {
        double f1 = anchors[0].f, f2 = anchors[1].f;
        double p1 = r.c0 + (r.c1 + r.c2 * f1) * f1;
        double p2 = r.c0 + (r.c1 + r.c2 * f2) * f2;
        r.c1 = (p2 - p1) / (f2 - f1);
        r.c0 = wrap_pi(p1 - r.c1 * f1);
        r.c2 = 0.0;
        r.objective = obj(r.c0, r.c1, 0.0);
    }

    r.rotations = std::abs(r.c1) * (freq[n - 1] - freq[0]) / (2.0 * kPi);
    return r;
}

} // namespace

double PhaseModel::v_rotations() const {
    return std::abs(d1) * v_bandwidth_hz / (2.0 * kPi);
}

double eval_phase_h(double f_hz, const PhaseModel& m) {
    return m.c0 + (m.c1 + m.c2 * f_hz) * f_hz;
}

double eval_phase_v(double f_hz, const PhaseModel& m) { return m.d0 + m.d1 * f_hz; }

void apply_phase(cplx* spec, const double* freq_hz, size_t n, double c0, double c1,
                 double c2) {
    for (size_t k = 0; k < n; ++k) {
        double f = freq_hz[k];
        double phi = c0 + (c1 + c2 * f) * f;
        spec[k] *= std::polar(1.0, -wrap_pi(phi));
    }
}

cplx complex_at(const cplx* spec, size_t n, double pos) {
    if (n == 0) return {};
    if (pos <= 0) return spec[0];
    if (pos >= double(n - 1)) return spec[n - 1];
    size_t i = size_t(pos);
    double t = pos - double(i);
    return spec[i] * (1.0 - t) + spec[i + 1] * t;
}

PhaseFitResult optimize_phase_h(const cplx* spec, const double* freq_hz, size_t n,
                                const PhaseSeeds& seeds) {
    return fit_poly_phase(spec, freq_hz, n, seeds, true, 3, 0.5);
}

PhaseFitResult optimize_phase_v_single(const cplx* spec, const double* freq_hz, size_t n,
                                       const PhaseSeeds& seeds) {
    return fit_poly_phase(spec, freq_hz, n, seeds, false, 1, 0.0);
}

PhaseFitResult optimize_phase_v(const std::vector<std::vector<cplx>>& scans,
                                const double* freq_hz, size_t n, const PhaseSeeds& seeds) {
    if (scans.empty()) throw UsageError("no scans given");
    for (auto& s : scans)
        if (s.size() != n) throw UsageError("scan length mismatch");
    std::vector<cplx> sum(n, cplx{});
    for (auto& s : scans)
        for (size_t i = 0; i < n; ++i) sum[i] += s[i];
    double energy = 0;
    for (auto& z : sum) energy += std::norm(z);
    if (energy == 0.0) throw Error("all-zero input to the vertical phase fit");
    return optimize_phase_v_single(sum.data(), freq_hz, n, seeds);
}

} // namespace ms2d
