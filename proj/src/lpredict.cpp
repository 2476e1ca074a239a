#include "ms2d/lpredict.hpp"

#include "ms2d/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ms2d {

LPModel fit_backward_lp(const double* x, size_t n, size_t p, size_t train_begin,
                        size_t train_end) {
    if (p < 1) throw UsageError("p >= 1 required");
    if (train_end > n || train_begin >= train_end)
        throw UsageError("bad training window");
    size_t len = train_end - train_begin;
    if (len < 4 * p)
        throw UsageError("training window too short: " + std::to_string(len) +
                         " samples for order " + std::to_string(p));

    // rows: predict x(i) from x(i+1..i+p), i in [train_begin, train_end - p)
    size_t rows = len - p;
    Eigen::MatrixXd M(rows, p + 1);
    Eigen::VectorXd b(rows);
    for (size_t i = 0; i < rows; ++i) {
        size_t s = train_begin + i;
        M(i, 0) = 1.0;
        for (size_t k = 1; k <= p; ++k) M(i, k) = x[s + k];
        b(i) = x[s];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    if (qr.rank() < Eigen::Index(p + 1))
        throw Error("rank-deficient prediction system; reduce the order");
    Eigen::VectorXd c = qr.solve(b);

    LPModel m;
    m.p = p;
    m.intercept = c(0);
    m.coeff.assign(p, 0.0);
    for (size_t k = 0; k < p; ++k) m.coeff[k] = c(k + 1);
    m.train_rms = std::sqrt((M * c - b).squaredNorm() / double(rows));
    m.train_peak = 0.0;
    for (size_t i = train_begin; i < train_end; ++i)
        m.train_peak = std::max(m.train_peak, std::abs(x[i]));
    return m;
}

LPModel fit_backward_lp(const double* x, size_t n, size_t p) {
    return fit_backward_lp(x, n, p, n / 2, n);
}

bool repair_initial(double* x, size_t n, const LPModel& m, size_t n_corrupt) {
    if (n_corrupt == 0) return true;
    if (m.p == 0 || m.coeff.size() != m.p) throw UsageError("empty prediction model");
    if (n_corrupt + 4 * m.p >= n)
        throw UsageError("corrupt region too long: " + std::to_string(n_corrupt) +
                         " of " + std::to_string(n) + " samples");

    double limit = 10.0 * m.train_peak;
    for (size_t i = n_corrupt; i-- > 0;) {
        double v = m.intercept;
        for (size_t k = 1; k <= m.p; ++k) v += m.coeff[k - 1] * x[i + k];
        if (!(std::abs(v) <= limit)) {
            std::fill(x, x + n_corrupt, 0.0);
            return false;
        }
        x[i] = v;
    }
    return true;
}

size_t estimate_n_corrupt(double v_rotations, size_t n) {
    double r = std::abs(v_rotations);
    auto est = size_t(std::llround(r));
    return std::min(est, n / 4);
}

} // namespace ms2d
