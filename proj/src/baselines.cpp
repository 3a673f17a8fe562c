#include "wsc/baselines.hpp"

#include <string>

#include "wsc/linalg.hpp"

namespace wsc {

namespace {

// Empirical one-sided transform over the bulk singular values with zero
// padding for the larger dimension: value and derivative of
// [sum_i z/(z^2 - s_i^2) + pad/z] / denom.
struct SideTransform {
    double value;
    double deriv;
};

SideTransform side_transform(const Eigen::VectorXd& bulk, double pad,
                             double denom, double z) {
    double v = pad / z;
    double d = -pad / (z * z);
    for (Eigen::Index i = 0; i < bulk.size(); ++i) {
        const double s2 = bulk(i) * bulk(i);
        const double gap = z * z - s2;
        v += z / gap;
        d += -(z * z + s2) / (gap * gap);
    }
    return {v / denom, d / denom};
}

}  // namespace

Eigen::MatrixXd optshrink(const Eigen::MatrixXd& y, int r) {
    const Eigen::Index p = y.rows();
    const Eigen::Index n = y.cols();
    const Eigen::Index q = std::min(p, n);
    if (r <= 0 || 2 * static_cast<Eigen::Index>(r) >= q)
        throw InvalidRankError("optshrink: need 0 < r < min(p,n)/2, got r = " +
                               std::to_string(r));
    if (q - r < 30)
        throw InsufficientBulkError(
            "optshrink: fewer than 30 bulk singular values; derivative "
            "estimate would be unstable");
    auto svd = linalg::svd_thin(y);
    linalg::fix_svd_signs(svd.u, svd.v);
    const Eigen::VectorXd bulk = svd.s.tail(q - r);

    Eigen::MatrixXd x_hat = Eigen::MatrixXd::Zero(p, n);
    for (int k = 0; k < r; ++k) {
        const double z = svd.s(k);
        const auto t1 = side_transform(bulk, static_cast<double>(p - q),
                                       static_cast<double>(p - r), z);
        const auto t2 = side_transform(bulk, static_cast<double>(n - q),
                                       static_cast<double>(n - r), z);
        const double dval = t1.value * t2.value;
        const double dder = t1.deriv * t2.value + t1.value * t2.deriv;
        const double w = -2.0 * dval / dder;
        if (w > 0.0)
            x_hat.noalias() += w * svd.u.col(k) * svd.v.col(k).transpose();
    }
    return x_hat;
}

Eigen::MatrixXd truncated_svd(const Eigen::MatrixXd& y, int r) {
    const Eigen::Index q = std::min(y.rows(), y.cols());
    if (r < 0 || static_cast<Eigen::Index>(r) > q)
        throw InvalidRankError("truncated_svd: need 0 <= r <= min(p,n), got r = " +
                               std::to_string(r));
    if (r == 0) return Eigen::MatrixXd::Zero(y.rows(), y.cols());
    auto svd = linalg::svd_thin(y);
    return svd.u.leftCols(r) * svd.s.head(r).asDiagonal() *
           svd.v.leftCols(r).transpose();
}

}  // namespace wsc
