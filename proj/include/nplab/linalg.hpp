#pragma once

#include <Eigen/Dense>

namespace nplab {

/// Eigen-decomposition of a symmetric matrix (LAPACK dsyevd).
/// Eigenvalues ascending; columns of vectors are the eigenvectors.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
SymEig sym_eig(const Eigen::MatrixXd& A);

/// Cholesky A = L*L^T. Throws std::runtime_error if A is not positive definite.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& A);

/// True if the Cholesky factorization succeeds (all pivots positive).
bool is_positive_definite(const Eigen::MatrixXd& A);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) {
    return 0.5 * (A + A.transpose());
}

} // namespace nplab
