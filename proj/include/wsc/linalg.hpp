#pragma once

#include <Eigen/Dense>

namespace wsc::linalg {

// Force single-threaded BLAS so results are byte-identical regardless of the
// caller's --threads setting. Call once at process start.
void pin_blas_single_thread();

// Symmetric eigendecomposition A = V diag(w) V^T, eigenvalues ascending.
// Backed by LAPACK dsyevd.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
SymEig sym_eig(const Eigen::MatrixXd& a);

// Eigenvalues only (ascending), no vectors.
Eigen::VectorXd sym_eigvals(const Eigen::MatrixXd& a);

// Thin SVD A = U diag(s) V^T with s descending, U: p x q, V: n x q,
// q = min(p, n). Backed by LAPACK dgesdd.
struct Svd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};
Svd svd_thin(const Eigen::MatrixXd& a);

// Orient each column of u so its largest-magnitude entry is positive and
// flip the matching column of v, preserving u s v^T. Deterministic output
// across runs and platforms.
void fix_svd_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v);

}  // namespace wsc::linalg
