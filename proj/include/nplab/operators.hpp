#pragma once

#include "nplab/mesh.hpp"

#include <Eigen/Dense>
#include <string>

namespace nplab {

/// Nystrom matrix of the adjoint double-layer operator
///   K*[phi](x) = (1/2pi) int phi(y) (x-y).n_x / |x-y|^2 ds(y),
/// diagonal entries from the curvature limit kappa/(4pi).
Eigen::MatrixXd assemble_k_star(const Mesh& mesh);

/// Nystrom matrix of the double-layer operator
///   K[phi](x) = -(1/2pi) int phi(y) (x-y).n_y / |x-y|^2 ds(y).
Eigen::MatrixXd assemble_k(const Mesh& mesh);

/// Single-layer operator S[phi](x) = -(1/2pi) int log(beta |x-y|) phi(y) ds(y).
/// Uniform meshes use the spectrally accurate periodic-log splitting; graded
/// meshes use per-panel product integration with dyadic refinement toward the
/// singularity.
Eigen::MatrixXd assemble_s(const Mesh& mesh, double beta = 1.0);

/// Energy Gram matrix G = sym(diag(w) * S) for the S-weighted inner product
/// <phi, psi> = phi^T G psi.
struct SGram {
    Eigen::MatrixXd G;
    bool full_pd = false; // whether G is positive definite on the whole space
};
SGram build_s_gram(const Mesh& mesh, const Eigen::MatrixXd& S);

/// Relative symmetrization (Plemelj) residual ||K S - S K*|| / ||S|| in the
/// weighted Frobenius norm ||A||_w = ||W^{1/2} A W^{-1/2}||_F.
double plemelj_residual(const Mesh& mesh, const Eigen::MatrixXd& K,
                        const Eigen::MatrixXd& Kstar, const Eigen::MatrixXd& S);

/// Largest deviation of the discrete Gauss identity K[1] = 1/2:
/// max_i |sum_j K_ij - 1/2|.
double gauss_identity_error(const Eigen::MatrixXd& K);

/// Equilibrium density: the eigenvector of K* with eigenvalue nearest 1/2,
/// normalized to unit total mass (w^T psi = 1) and positive sign.
Eigen::VectorXd equilibrium_density(const Mesh& mesh, const Eigen::MatrixXd& Kstar);

/// Row-major binary export: int64 rows, int64 cols, then rows*cols doubles.
void write_matrix_binary(const Eigen::MatrixXd& M, const std::string& path);
Eigen::MatrixXd read_matrix_binary(const std::string& path);
void write_matrix_csv(const Eigen::MatrixXd& M, const std::string& path);

} // namespace nplab
