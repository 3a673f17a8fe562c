#pragma once

#include <Eigen/Dense>

#include "wsc/errors.hpp"

namespace wsc {

enum class BaselineKind { OptShrink, TruncatedSVD };

// Data-driven optimal shrinkage without whitening: the empirical D-transform
// and its derivative are built from the trailing min(p,n) - r singular
// values (plus zero padding for the rectangular side), and component k is
// weighted by -2 D(theta_k) / D'(theta_k). Requires at least 30 bulk values
// (InsufficientBulkError otherwise) and r < min(p,n)/2.
Eigen::MatrixXd optshrink(const Eigen::MatrixXd& y, int r);

// Best rank-r approximation in Frobenius norm.
Eigen::MatrixXd truncated_svd(const Eigen::MatrixXd& y, int r);

}  // namespace wsc
