#pragma once

#include <functional>
#include <vector>

namespace nplab {

/// Gauss-Legendre rule on [-1,1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule (Golub-Welsch).
const GaussRule& gauss_legendre(int n);

/// Adaptive Gauss quadrature of f over [a,b] to the given absolute/relative tolerance.
double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-12, int max_depth = 48);

/// Integral over [a,b] of an integrand with an integrable (e.g. logarithmic)
/// singularity at t_sing in [a,b]: dyadic subdivision toward the singular point
/// with a fixed Gauss rule per subinterval.
double singular_quad(const std::function<double(double)>& f, double a, double b,
                     double t_sing, int levels = 46, int order = 16);

/// Barycentric Lagrange interpolation weights for the given nodes.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

/// Values of all Lagrange basis polynomials for `nodes` at point x.
void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary,
                    double x, std::vector<double>& out);

} // namespace nplab
