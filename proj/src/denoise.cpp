#include "ms2d/denoise.hpp"

#include "ms2d/common.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace ms2d {

namespace {

template <typename Scalar>
std::vector<Scalar> cadzow_impl(const std::vector<Scalar>& x, const DenoiseSpec& spec) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const size_t n = x.size();
    if (n < 4) throw UsageError("signal too short to denoise");
    size_t L = spec.hankel_rows ? spec.hankel_rows : n / 2;
    if (L < 2 || L > n - 1) throw UsageError("bad hankel_rows");
    size_t K = n - L + 1;
    if (spec.rank < 1) throw UsageError("rank >= 1 required");
    if (spec.rank >= std::min(L, K))
        throw UsageError("rank " + std::to_string(spec.rank) +
                         " too large for a " + std::to_string(L) + "x" +
                         std::to_string(K) + " embedding");
    if (spec.iterations < 1) throw UsageError("iterations >= 1 required");

    std::vector<Scalar> y = x;
    Mat H(L, K);
    for (size_t it = 0; it < spec.iterations; ++it) {
        for (size_t i = 0; i < L; ++i)
            for (size_t j = 0; j < K; ++j) H(i, j) = y[i + j];

        Eigen::BDCSVD<Mat> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
        auto U = svd.matrixU().leftCols(spec.rank);
        auto V = svd.matrixV().leftCols(spec.rank);
        auto S = svd.singularValues().head(spec.rank);
        Mat R = U * S.asDiagonal() * V.adjoint();

        for (size_t s = 0; s < n; ++s) {
            size_t i0 = s >= K ? s - K + 1 : 0;
            size_t i1 = std::min(L - 1, s);
            Scalar acc{};
            for (size_t i = i0; i <= i1; ++i) acc += R(i, s - i);
            y[s] = acc / double(i1 - i0 + 1);
        }
    }

    // anti-diagonal weights differ at the edges, so clamp any tiny energy gain
    double ein = 0, eout = 0;
    for (size_t i = 0; i < n; ++i) {
        ein += std::norm(x[i]);
        eout += std::norm(y[i]);
    }
    if (eout > ein && eout > 0) {
        double scale = std::sqrt(ein / eout);
        for (auto& v : y) v *= scale;
    }
    return y;
}

} // namespace

std::vector<double> cadzow(const std::vector<double>& x, const DenoiseSpec& spec) {
    return cadzow_impl(x, spec);
}

std::vector<cplx> cadzow(const std::vector<cplx>& x, const DenoiseSpec& spec) {
    return cadzow_impl(x, spec);
}

} // namespace ms2d
