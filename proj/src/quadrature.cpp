#include "nplab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nplab {

static GaussRule compute_gauss(int n) {
    // Golub-Welsch: eigenvalues of the Jacobi matrix.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = es.eigenvalues()(k);
        double v = es.eigenvectors()(0, k);
        r.weights[k] = 2.0 * v * v;
    }
    return r;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, compute_gauss(n)).first;
    return it->second;
}

static double gauss_on(const std::function<double(double)>& f, double a, double b,
                       const GaussRule& g) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t k = 0; k < g.nodes.size(); ++k)
        s += g.weights[k] * f(mid + half * g.nodes[k]);
    return s * half;
}

static double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                           double whole, double tol, int depth,
                           const GaussRule& g) {
    double mid = 0.5 * (a + b);
    double left = gauss_on(f, a, mid, g);
    double right = gauss_on(f, mid, b, g);
    double err = std::abs(left + right - whole);
    if (err < tol || depth <= 0)
        return left + right;
    return adaptive_rec(f, a, mid, left, 0.5 * tol, depth - 1, g) +
           adaptive_rec(f, mid, b, right, 0.5 * tol, depth - 1, g);
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double tol, int max_depth) {
    const GaussRule& g = gauss_legendre(15);
    double whole = gauss_on(f, a, b, g);
    return adaptive_rec(f, a, b, whole, tol, max_depth, g);
}

double singular_quad(const std::function<double(double)>& f, double a, double b,
                     double t_sing, int levels, int order) {
    if (!(a <= t_sing && t_sing <= b))
        throw std::invalid_argument("singular_quad: singular point outside interval");
    const GaussRule& g = gauss_legendre(order);
    double total = 0.0;
    // Each side of the singularity: geometric subdivision toward t_sing.
    for (int side = 0; side < 2; ++side) {
        double len = side == 0 ? t_sing - a : b - t_sing;
        if (len <= 0.0)
            continue;
        double outer = len;
        for (int lev = 0; lev < levels; ++lev) {
            double inner = (lev == levels - 1) ? 0.0 : outer * 0.5;
            double lo, hi;
            if (side == 0) {
                lo = t_sing - outer;
                hi = t_sing - inner;
            } else {
                lo = t_sing + inner;
                hi = t_sing + outer;
            }
            if (hi > lo)
                total += gauss_on(f, lo, hi, g);
            outer = inner;
            if (outer == 0.0)
                break;
        }
    }
    return total;
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j)
                w[i] /= (nodes[i] - nodes[j]);
    return w;
}

void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary,
                    double x, std::vector<double>& out) {
    size_t n = nodes.size();
    out.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double d = x - nodes[i];
        if (d == 0.0) {
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (size_t i = 0; i < n; ++i) {
        out[i] = bary[i] / (x - nodes[i]);
        denom += out[i];
    }
    for (size_t i = 0; i < n; ++i)
        out[i] /= denom;
}

} // namespace nplab
