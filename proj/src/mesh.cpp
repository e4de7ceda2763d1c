#include "nplab/mesh.hpp"

#include "nplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nplab {

namespace {

double wrap01(double t) {
    double r = t - std::floor(t);
    return (r == 1.0) ? 0.0 : r;
}

double circ_dist(double a, double b) {
    double d = std::abs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

void fill_node_geometry(Mesh& m) {
    int n = m.size();
    m.points.resize(n);
    m.normals.resize(n);
    m.curvatures.resize(n);
    for (int i = 0; i < n; ++i) {
        m.points[i] = m.curve->position(m.t[i]);
        m.normals[i] = m.curve->outward_normal(m.t[i]);
        m.curvatures[i] = m.curve->curvature(m.t[i]);
    }
}

} // namespace

Mesh build_uniform_mesh(std::shared_ptr<const Curve> curve, int N) {
    if (!curve)
        throw std::invalid_argument("build_uniform_mesh: null curve");
    if (!curve->corners().empty())
        throw std::invalid_argument("build_uniform_mesh: curve has corners; use a graded mesh");
    if (N < 4 || N % 2 != 0)
        throw std::invalid_argument("build_uniform_mesh: N must be even and >= 4");
    Mesh m;
    m.curve = std::move(curve);
    m.kind = MeshKind::Uniform;
    m.t.resize(N);
    m.w.assign(N, m.curve->total_length() / N);
    for (int i = 0; i < N; ++i)
        m.t[i] = double(i) / N;
    fill_node_geometry(m);
    return m;
}

Mesh build_graded_mesh(std::shared_ptr<const Curve> curve, const GradedOptions& opts) {
    if (!curve)
        throw std::invalid_argument("build_graded_mesh: null curve");
    const auto& corners = curve->corners();
    if (corners.empty())
        throw std::invalid_argument("build_graded_mesh: curve is smooth; use a uniform mesh");
    if (opts.depth < 1 || opts.order < 2)
        throw std::invalid_argument("build_graded_mesh: invalid depth/order");
    if (!(opts.sigma > 0.0 && opts.sigma < 1.0))
        throw std::invalid_argument("build_graded_mesh: sigma must lie in (0,1)");
    if (!(opts.corner_fraction > 0.0 && opts.corner_fraction < 0.5))
        throw std::invalid_argument("build_graded_mesh: corner_fraction must lie in (0,1/2)");

    Mesh m;
    m.curve = curve;
    m.kind = MeshKind::Graded;
    m.graded_opts = opts;

    size_t K = corners.size();
    const GaussRule& g = gauss_legendre(opts.order);
    double L = curve->total_length();

    auto add_panel = [&](double t0, double t1, int level) {
        Panel pa;
        pa.t0 = t0;
        pa.t1 = t1;
        pa.first = m.size();
        pa.order = opts.order;
        pa.level = level;
        double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
        for (int k = 0; k < opts.order; ++k) {
            m.t.push_back(wrap01(mid + half * g.nodes[k]));
            m.w.push_back(g.weights[k] * half * L);
        }
        m.panels.push_back(pa);
    };

    for (size_t r = 0; r < K; ++r) {
        double a = corners[r].t;
        double b = (r + 1 < K) ? corners[r + 1].t : corners[0].t + 1.0;
        double span = b - a;
        double block = opts.corner_fraction * span;
        if (block * std::pow(opts.sigma, opts.depth) < 1e-13)
            throw std::invalid_argument("build_graded_mesh: grading underflows parameter resolution");
        // Graded block leaving the corner at a: breakpoints a + block*sigma^j.
        add_panel(a, a + block * std::pow(opts.sigma, opts.depth), opts.depth);
        for (int j = opts.depth; j >= 1; --j)
            add_panel(a + block * std::pow(opts.sigma, j),
                      a + block * std::pow(opts.sigma, j - 1), j - 1);
        // Quasi-uniform middle.
        double mid_lo = a + block, mid_hi = b - block;
        double coarse = block * (1.0 - opts.sigma);
        // Tolerant ceiling: regions related by a symmetry can differ by one
        // ulp in span and must still get the same panel count.
        int n_mid = std::max(1, (int)std::ceil((mid_hi - mid_lo) / coarse - 1e-9));
        for (int k = 0; k < n_mid; ++k)
            add_panel(mid_lo + (mid_hi - mid_lo) * k / n_mid,
                      mid_lo + (mid_hi - mid_lo) * (k + 1) / n_mid, 0);
        // Graded block approaching the corner at b.
        for (int j = 0; j < opts.depth; ++j)
            add_panel(b - block * std::pow(opts.sigma, j),
                      b - block * std::pow(opts.sigma, j + 1), j);
        add_panel(b - block * std::pow(opts.sigma, opts.depth), b, opts.depth);
    }
    fill_node_geometry(m);
    return m;
}

Mesh refine(const Mesh& mesh) {
    if (mesh.kind == MeshKind::Uniform)
        return build_uniform_mesh(mesh.curve, 2 * mesh.size());
    GradedOptions o = mesh.graded_opts;
    o.depth += 4;
    return build_graded_mesh(mesh.curve, o);
}

std::vector<int> mirror_pairing(const Mesh& mesh, const ReflectionSymmetry& sym) {
    int n = mesh.size();
    std::vector<int> out(n, -1);
    if (mesh.kind == MeshKind::Uniform) {
        double cN = sym.c * n;
        long r = std::lround(cN);
        if (std::abs(cN - r) > 1e-9)
            throw std::invalid_argument("mirror_pairing: mesh not aligned with symmetry");
        for (int i = 0; i < n; ++i)
            out[i] = int(((r - i) % n + n) % n);
        return out;
    }
    size_t P = mesh.panels.size();
    for (size_t q = 0; q < P; ++q) {
        const Panel& pa = mesh.panels[q];
        double mid = 0.5 * (pa.t0 + pa.t1), len = pa.t1 - pa.t0;
        double target = sym.c - mid; // image midpoint (mod 1)
        size_t best = P;
        double bd = 1e300;
        for (size_t q2 = 0; q2 < P; ++q2) {
            double d = circ_dist(0.5 * (mesh.panels[q2].t0 + mesh.panels[q2].t1), target);
            if (d < bd) {
                bd = d;
                best = q2;
            }
        }
        const Panel& pb = mesh.panels[best];
        if (bd > 0.25 * len || std::abs((pb.t1 - pb.t0) - len) > 1e-9 * len + 1e-13)
            throw std::invalid_argument("mirror_pairing: mesh not symmetric under involution");
        for (int k = 0; k < pa.order; ++k)
            out[pa.first + k] = pb.first + (pa.order - 1 - k);
    }
    for (int i = 0; i < n; ++i)
        if (out[out[i]] != i)
            throw std::logic_error("mirror_pairing: pairing is not an involution");
    return out;
}

std::vector<int> rotation_permutation(const Mesh& mesh, const RotationSymmetry& rot) {
    int n = mesh.size();
    if (rot.order < 1)
        throw std::invalid_argument("rotation_permutation: invalid order");
    std::vector<int> out(n, -1);
    if (mesh.kind == MeshKind::Uniform) {
        if (n % rot.order != 0)
            throw std::invalid_argument("rotation_permutation: order does not divide N");
        int s = n / rot.order;
        for (int i = 0; i < n; ++i)
            out[i] = (i + s) % n;
        return out;
    }
    double shift = 1.0 / rot.order;
    size_t P = mesh.panels.size();
    for (size_t q = 0; q < P; ++q) {
        const Panel& pa = mesh.panels[q];
        double mid = 0.5 * (pa.t0 + pa.t1), len = pa.t1 - pa.t0;
        size_t best = P;
        double bd = 1e300;
        for (size_t q2 = 0; q2 < P; ++q2) {
            double d = circ_dist(0.5 * (mesh.panels[q2].t0 + mesh.panels[q2].t1), mid + shift);
            if (d < bd) {
                bd = d;
                best = q2;
            }
        }
        const Panel& pb = mesh.panels[best];
        if (bd > 0.25 * len || std::abs((pb.t1 - pb.t0) - len) > 1e-9 * len + 1e-13)
            throw std::invalid_argument("rotation_permutation: mesh not invariant under rotation");
        for (int k = 0; k < pa.order; ++k)
            out[pa.first + k] = pb.first + k;
    }
    return out;
}

std::pair<double, double> involution_fixed_points(const ReflectionSymmetry& sym) {
    return {wrap01(0.5 * sym.c), wrap01(0.5 * sym.c + 0.5)};
}

void write_mesh_csv(const Mesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_mesh_csv: cannot open " + path);
    f << "i,t,x,y,w,panel,level\n";
    f.precision(17);
    for (int i = 0; i < mesh.size(); ++i) {
        int panel = -1, level = -1;
        for (size_t q = 0; q < mesh.panels.size(); ++q)
            if (i >= mesh.panels[q].first && i < mesh.panels[q].first + mesh.panels[q].order) {
                panel = int(q);
                level = mesh.panels[q].level;
                break;
            }
        f << i << ',' << mesh.t[i] << ',' << mesh.points[i].x() << ',' << mesh.points[i].y()
          << ',' << mesh.w[i] << ',' << panel << ',' << level << '\n';
    }
}

} // namespace nplab
