#include "wsc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <lapacke.h>

extern "C" void openblas_set_num_threads(int);

namespace wsc::linalg {

void pin_blas_single_thread() {
    openblas_set_num_threads(1);
    Eigen::setNbThreads(1);
}

SymEig sym_eig(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("sym_eig: matrix must be square");
    SymEig out;
    out.vectors = a;
    out.values.resize(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.rows());
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                       out.values.data());
    if (info != 0)
        throw std::runtime_error("sym_eig: dsyevd failed with info " +
                                 std::to_string(info));
    return out;
}

Eigen::VectorXd sym_eigvals(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("sym_eigvals: matrix must be square");
    Eigen::MatrixXd work = a;
    Eigen::VectorXd values(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.rows());
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, values.data());
    if (info != 0)
        throw std::runtime_error("sym_eigvals: dsyevd failed with info " +
                                 std::to_string(info));
    return values;
}

Svd svd_thin(const Eigen::MatrixXd& a) {
    const lapack_int p = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int q = std::min(p, n);
    Eigen::MatrixXd work = a;
    Svd out;
    out.u.resize(p, q);
    out.s.resize(q);
    Eigen::MatrixXd vt(q, n);
    const lapack_int info =
        LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', p, n, work.data(), p, out.s.data(),
                       out.u.data(), p, vt.data(), q);
    if (info != 0)
        throw std::runtime_error("svd_thin: dgesdd failed with info " +
                                 std::to_string(info));
    out.v = vt.transpose();
    return out;
}

void fix_svd_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        Eigen::Index imax = 0;
        u.col(k).cwiseAbs().maxCoeff(&imax);
        if (u(imax, k) < 0.0) {
            u.col(k) = -u.col(k);
            if (k < v.cols()) v.col(k) = -v.col(k);
        }
    }
}

}  // namespace wsc::linalg
