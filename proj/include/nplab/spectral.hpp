#pragma once

#include "nplab/curves.hpp"
#include "nplab/mesh.hpp"
#include "nplab/operators.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace nplab {

enum class ParityBlock { Full, Even, Odd };

/// Eigen-decomposition of K* in the S-energy inner product <phi,psi> = phi^T G psi,
/// restricted to the mean-zero subspace (which removes the trivial eigenvalue
/// 1/2) and optionally to one parity block of a mirror symmetry.
struct SpectralResult {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // S-normalized columns: v^T G v = 1
    std::vector<char> parity; // 'e', 'o' or '?' per eigenpair
};

SpectralResult solve_s_symmetric(const Mesh& mesh, const Eigen::MatrixXd& Kstar,
                                 const SGram& gram, ParityBlock block = ParityBlock::Full,
                                 const ReflectionSymmetry* sym = nullptr);

/// Euclidean-orthonormal basis of the even (phi o iota = phi) or odd subspace
/// of a mirror symmetry, built from the node involution.
Eigen::MatrixXd parity_basis(const Mesh& mesh, const ReflectionSymmetry& sym, bool even);

/// Spectral projectors of the cyclic rotation action: P_k = (1/r) sum_j
/// conj(omega^{jk}) Pi^j with omega = exp(2 pi i / r).
std::vector<Eigen::MatrixXcd> cyclic_projectors(const Mesh& mesh, const RotationSymmetry& rot);

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool contains(double x, double margin = 0.0) const { return x >= lo - margin && x <= hi + margin; }
    double distance(double x) const { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }
};

/// Predicted essential spectrum of each parity block, accumulated over the
/// corners of the curve: a corner of half exterior angle theta contributes
/// b = |1/2 - theta/pi|.  Corners on the symmetry line split by orientation
/// (outward: even [0,b], odd [-b,0]; inward swapped); mirror-pair corners off
/// the line contribute [-b,b] to both parities.
struct EssentialSpectrum {
    Interval even, odd;
};
EssentialSpectrum predict_essential_spectrum(const Curve& curve, const ReflectionSymmetry& sym);

/// Refinement-stability scan for eigenvalues embedded in the essential
/// spectrum of the opposite parity block.
struct EmbeddedOptions {
    std::vector<int> depths{12, 16, 20}; // graded depths, at least 3
    int order = 16;
    double sigma = 0.5;
    double stability_tol = 1e-3; // |lambda(m) - lambda(m+step)| bound
    double margin = 0.02;        // min distance from own essential interval
};
struct EmbeddedCandidate {
    double lambda = 0.0;  // value at the finest depth
    char parity = '?';
    double stability = 0.0; // max drift across consecutive depths
};
struct EmbeddedScanResult {
    EssentialSpectrum ess;
    std::vector<EmbeddedCandidate> candidates;
    std::vector<std::vector<double>> even_values, odd_values; // per depth
    std::vector<int> depths;
};
EmbeddedScanResult embedded_scan(std::shared_ptr<const Curve> curve,
                                 const ReflectionSymmetry& sym, const EmbeddedOptions& opts);

/// Trigonometric interpolation of samples on the uniform grid t_j = j/N
/// (N even) at parameter t.
double trig_interpolate(const Eigen::VectorXd& samples, double t);

/// Cutoff quasimode transplanted from a base-curve eigenfunction onto a
/// type-T perturbed curve: psi = chi * phi with chi = 1 on A' \ J, the
/// constant `a` on a subarc J of A' (chosen where |phi| > max/2 and phi keeps
/// its sign, with len(J) matching the removed complement), and 0 outside A'.
/// `a` is solved from the discrete mean-zero condition and must satisfy
/// |a| < 2.
struct QuasimodeResult {
    Eigen::VectorXd psi; // on the realized mesh
    double a = 0.0;
    double j_lo = 0.0, j_hi = 0.0; // J in base parameter
    double epsilon = 0.0; // ||(K* - lambda) psi||_G / ||psi||_G
};
QuasimodeResult build_cutoff_quasimode(const Mesh& mesh, const TypeTPerturbation& pert,
                                       const Eigen::VectorXd& base_phi, double lambda,
                                       const Eigen::MatrixXd& Kstar, const SGram& gram);

/// Fraction of the weighted mass of v carried by nodes within parameter
/// distance `radius` of t_center (circular distance).
double localized_mass_fraction(const Mesh& mesh, const Eigen::VectorXd& v,
                               double t_center, double radius);

} // namespace nplab
