#include "nplab/operators.hpp"

#include "nplab/quadrature.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nplab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
} // namespace

Eigen::MatrixXd assemble_k_star(const Mesh& mesh) {
    int n = mesh.size();
    Eigen::MatrixXd A(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const Vec2& xi = mesh.points[i];
        const Vec2& ni = mesh.normals[i];
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                A(i, i) = mesh.curvatures[i] / (4.0 * kPi) * mesh.w[i];
                continue;
            }
            Vec2 d = xi - mesh.points[j];
            A(i, j) = (d.dot(ni)) / (kTwoPi * d.squaredNorm()) * mesh.w[j];
        }
    }
    return A;
}

Eigen::MatrixXd assemble_k(const Mesh& mesh) {
    int n = mesh.size();
    Eigen::MatrixXd A(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const Vec2& xi = mesh.points[i];
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                A(i, i) = mesh.curvatures[i] / (4.0 * kPi) * mesh.w[i];
                continue;
            }
            Vec2 d = xi - mesh.points[j];
            A(i, j) = -(d.dot(mesh.normals[j])) / (kTwoPi * d.squaredNorm()) * mesh.w[j];
        }
    }
    return A;
}

// ---------------------------------------------------------------------------
// Single layer, uniform mesh: periodic-log product quadrature.

static Eigen::MatrixXd assemble_s_uniform(const Mesh& mesh, double beta) {
    int n = mesh.size();
    double L = mesh.curve->total_length();
    // Quadrature weights for int_0^1 ln(2|sin(pi(t_i - s))|) phi(s) ds on the
    // uniform grid; depend only on d = i - j mod n.
    std::vector<double> wlog(n);
    int half = n / 2;
    for (int d = 0; d < n; ++d) {
        double acc = 0.0;
        double theta = kTwoPi * d / n;
        for (int m = 1; m < half; ++m)
            acc += std::cos(m * theta) / m;
        acc += std::cos(half * theta) / n;
        wlog[d] = -acc / n;
    }
    Eigen::MatrixXd S(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double rho;
            if (i == j) {
                rho = L / kTwoPi;
            } else {
                double sn = std::abs(std::sin(kPi * double(i - j) / n));
                rho = (mesh.points[i] - mesh.points[j]).norm() / (2.0 * sn);
            }
            int d = ((i - j) % n + n) % n;
            S(i, j) = -(L / kTwoPi) * (wlog[d] + std::log(beta * rho) / n);
        }
    }
    return S;
}

// ---------------------------------------------------------------------------
// Single layer, graded mesh: panel product integration.

namespace {

/// Accumulates int ln(beta|x_i - x(xi)|) l_k(xi) dxi over [lo,hi] (panel-local
/// coordinates xi in [-1,1]) into I, using the panel's own nodes to
/// interpolate the geometry.
struct PanelIntegrator {
    const GaussRule* rule;           // panel interpolation nodes
    const std::vector<double>* bary; // barycentric weights for rule->nodes
    std::vector<Vec2> rel_pts;       // panel node positions relative to x_i
    int order;
    double beta;
    const GaussRule* qrule; // quadrature rule for the subintervals

    void accumulate(double lo, double hi, std::vector<double>& I,
                    std::vector<double>& basis) const {
        double mid = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (size_t q = 0; q < qrule->nodes.size(); ++q) {
            double x = mid + h * qrule->nodes[q];
            lagrange_basis(rule->nodes, *bary, x, basis);
            // Interpolating x(s) - x_i instead of x(s) keeps the cancellation
            // at panel scale, so distances stay accurate arbitrarily close to
            // the singularity.
            Vec2 p(0, 0);
            for (int k = 0; k < order; ++k)
                p += basis[k] * rel_pts[k];
            double d = std::max(p.norm(), 1e-300);
            double v = std::log(beta * d) * qrule->weights[q] * h;
            for (int k = 0; k < order; ++k)
                I[k] += v * basis[k];
        }
    }

    /// Dyadic refinement toward xs from both sides within [-1,1].
    void dyadic(double xs, int levels, std::vector<double>& I,
                std::vector<double>& basis) const {
        for (int side = 0; side < 2; ++side) {
            double len = side == 0 ? xs - (-1.0) : 1.0 - xs;
            if (len <= 0.0)
                continue;
            double outer = len;
            for (int lev = 0; lev < levels; ++lev) {
                double inner = (lev == levels - 1) ? 0.0 : outer * 0.5;
                double lo = side == 0 ? xs - outer : xs + inner;
                double hi = side == 0 ? xs - inner : xs + outer;
                if (hi > lo)
                    accumulate(lo, hi, I, basis);
                outer = inner;
                if (outer == 0.0)
                    break;
            }
        }
    }
};

} // namespace

static Eigen::MatrixXd assemble_s_graded(const Mesh& mesh, double beta) {
    int n = mesh.size();
    double L = mesh.curve->total_length();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    size_t P = mesh.panels.size();

    // Panel arclengths and node positions stay in the mesh arrays; collect
    // panel arclength for the near-field criterion.
    std::vector<double> plen(P);
    for (size_t q = 0; q < P; ++q)
        plen[q] = (mesh.panels[q].t1 - mesh.panels[q].t0) * L;

    const GaussRule& qrule = gauss_legendre(16);

#pragma omp parallel
    {
        std::vector<double> basis, I;
#pragma omp for schedule(dynamic, 8)
        for (int i = 0; i < n; ++i) {
            const Vec2& xi = mesh.points[i];
            for (size_t q = 0; q < P; ++q) {
                const Panel& pa = mesh.panels[q];
                bool self = i >= pa.first && i < pa.first + pa.order;
                double dmin = 1e300;
                int jmin = -1;
                for (int k = 0; k < pa.order; ++k) {
                    double d = (xi - mesh.points[pa.first + k]).norm();
                    if (d < dmin) {
                        dmin = d;
                        jmin = k;
                    }
                }
                if (!self && dmin >= 2.0 * plen[q]) {
                    // Far field: plain product rule with the panel weights.
                    for (int k = 0; k < pa.order; ++k) {
                        int j = pa.first + k;
                        S(i, j) += -(1.0 / kTwoPi) *
                                   std::log(beta * (xi - mesh.points[j]).norm()) * mesh.w[j];
                    }
                    continue;
                }
                const GaussRule& rule = gauss_legendre(pa.order);
                static thread_local std::vector<double> bary_cache;
                static thread_local int bary_order = -1;
                if (bary_order != pa.order) {
                    bary_cache = barycentric_weights(rule.nodes);
                    bary_order = pa.order;
                }
                PanelIntegrator pint;
                pint.rule = &rule;
                pint.bary = &bary_cache;
                pint.order = pa.order;
                pint.beta = beta;
                pint.qrule = &qrule;
                pint.rel_pts.resize(pa.order);
                for (int k = 0; k < pa.order; ++k)
                    pint.rel_pts[k] = mesh.points[pa.first + k] - xi;
                I.assign(pa.order, 0.0);
                if (self) {
                    pint.dyadic(rule.nodes[jmin], 44, I, basis);
                } else {
                    // Nearest endpoint of the panel in panel-local coordinates.
                    double mid = 0.5 * (pa.t0 + pa.t1), hf = 0.5 * (pa.t1 - pa.t0);
                    double d0 = (xi - mesh.curve->position(pa.t0)).norm();
                    double d1 = (xi - mesh.curve->position(pa.t1)).norm();
                    (void)mid;
                    (void)hf;
                    pint.dyadic(d0 < d1 ? -1.0 : 1.0, 30, I, basis);
                }
                double half_t = 0.5 * (pa.t1 - pa.t0);
                for (int k = 0; k < pa.order; ++k)
                    S(i, pa.first + k) += -(L / kTwoPi) * half_t * I[k];
            }
        }
    }
    return S;
}

Eigen::MatrixXd assemble_s(const Mesh& mesh, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("assemble_s: beta must be positive");
    if (mesh.kind == MeshKind::Uniform)
        return assemble_s_uniform(mesh, beta);
    return assemble_s_graded(mesh, beta);
}

SGram build_s_gram(const Mesh& mesh, const Eigen::MatrixXd& S) {
    int n = mesh.size();
    Eigen::MatrixXd WS = S;
    for (int i = 0; i < n; ++i)
        WS.row(i) *= mesh.w[i];
    SGram g;
    g.G = 0.5 * (WS + WS.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(g.G);
    g.full_pd = (llt.info() == Eigen::Success);
    return g;
}

double plemelj_residual(const Mesh& mesh, const Eigen::MatrixXd& K,
                        const Eigen::MatrixXd& Kstar, const Eigen::MatrixXd& S) {
    int n = mesh.size();
    Eigen::MatrixXd D = K * S - S * Kstar;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double scale = std::sqrt(mesh.w[i] / mesh.w[j]);
            num += std::pow(D(i, j) * scale, 2);
            den += std::pow(S(i, j) * scale, 2);
        }
    return std::sqrt(num / den);
}

double gauss_identity_error(const Eigen::MatrixXd& K) {
    return (K.rowwise().sum().array() - 0.5).abs().maxCoeff();
}

Eigen::VectorXd equilibrium_density(const Mesh& mesh, const Eigen::MatrixXd& Kstar) {
    int n = mesh.size();
    // Inverse iteration with shift just above 1/2.
    Eigen::MatrixXd A = Kstar - (0.5 + 1e-8) * Eigen::MatrixXd::Identity(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v.normalize();
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd vn = lu.solve(v);
        vn.normalize();
        if ((vn - v).norm() < 1e-14 || (vn + v).norm() < 1e-14) {
            v = vn;
            break;
        }
        v = vn;
    }
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
        mass += mesh.w[i] * v[i];
    if (mass == 0.0)
        throw std::runtime_error("equilibrium_density: zero total mass");
    return v / mass;
}

void write_matrix_binary(const Eigen::MatrixXd& M, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("write_matrix_binary: cannot open " + path);
    int64_t rows = M.rows(), cols = M.cols();
    f.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    f.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) {
            double v = M(i, j);
            f.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

Eigen::MatrixXd read_matrix_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("read_matrix_binary: cannot open " + path);
    int64_t rows = 0, cols = 0;
    f.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    f.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (rows < 0 || cols < 0 || rows * cols > (int64_t)1 << 32)
        throw std::runtime_error("read_matrix_binary: bad header");
    Eigen::MatrixXd M(rows, cols);
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) {
            double v;
            f.read(reinterpret_cast<char*>(&v), sizeof(v));
            M(i, j) = v;
        }
    if (!f)
        throw std::runtime_error("read_matrix_binary: truncated file");
    return M;
}

void write_matrix_csv(const Eigen::MatrixXd& M, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_matrix_csv: cannot open " + path);
    f.precision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            f << M(i, j) << (j + 1 < M.cols() ? "," : "");
        f << '\n';
    }
}

} // namespace nplab
