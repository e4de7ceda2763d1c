#include "nplab/linalg.hpp"

#include <lapacke.h>
#include <stdexcept>

namespace nplab {

SymEig sym_eig(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("sym_eig: matrix not square");
    SymEig r;
    r.vectors = A;
    lapack_int n = static_cast<lapack_int>(A.rows());
    r.values.resize(n);
    if (n == 0)
        return r;
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     r.vectors.data(), n, r.values.data());
    if (info != 0)
        throw std::runtime_error("sym_eig: dsyevd failed, info=" + std::to_string(info));
    return r;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("cholesky: matrix not positive definite");
    return llt.matrixL();
}

bool is_positive_definite(const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    return llt.info() == Eigen::Success;
}

} // namespace nplab
