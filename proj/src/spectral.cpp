#include "nplab/spectral.hpp"

#include "nplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nplab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap01(double t) {
    double r = t - std::floor(t);
    return (r == 1.0) ? 0.0 : r;
}

double circ_dist(double a, double b) {
    double d = std::abs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

} // namespace

Eigen::MatrixXd parity_basis(const Mesh& mesh, const ReflectionSymmetry& sym, bool even) {
    auto pair = mirror_pairing(mesh, sym);
    int n = mesh.size();
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> fixed;
    for (int i = 0; i < n; ++i) {
        if (pair[i] == i)
            fixed.push_back(i);
        else if (i < pair[i])
            pairs.emplace_back(i, pair[i]);
    }
    int m = even ? int(pairs.size() + fixed.size()) : int(pairs.size());
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, m);
    int col = 0;
    const double s = 1.0 / std::sqrt(2.0);
    for (auto [i, j] : pairs) {
        Z(i, col) = s;
        Z(j, col) = even ? s : -s;
        ++col;
    }
    if (even)
        for (int i : fixed)
            Z(i, col++) = 1.0;
    return Z;
}

SpectralResult solve_s_symmetric(const Mesh& mesh, const Eigen::MatrixXd& Kstar,
                                 const SGram& gram, ParityBlock block,
                                 const ReflectionSymmetry* sym) {
    int n = mesh.size();
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i)
        q[i] = mesh.w[i];
    q.normalize();

    Eigen::MatrixXd Z;
    if (block == ParityBlock::Full) {
        Z = Eigen::MatrixXd::Identity(n, n);
    } else {
        if (!sym)
            throw std::invalid_argument("solve_s_symmetric: parity block requires a symmetry");
        Z = parity_basis(mesh, *sym, block == ParityBlock::Even);
    }

    Eigen::MatrixXd MG = symmetrize(Z.transpose() * gram.G * Z);
    Eigen::MatrixXd MA = symmetrize(Z.transpose() * (gram.G * (Kstar * Z)));
    // Jacobi scaling before anything else: strongly graded meshes give G a
    // huge dynamic range, and a basis rotation at the original scale buries
    // the smallest diagonal entries under roundoff from the largest ones.
    Eigen::VectorXd d = MG.diagonal();
    if (d.minCoeff() <= 0.0)
        throw std::runtime_error("solve_s_symmetric: Gram matrix has nonpositive diagonal");
    Eigen::VectorXd dsi = d.cwiseSqrt().cwiseInverse();
    MG = symmetrize(dsi.asDiagonal() * MG * dsi.asDiagonal());
    MA = symmetrize(dsi.asDiagonal() * MA * dsi.asDiagonal());

    // Deflate the mean constraint q^T v = 0 (removing the trivial eigenvalue
    // 1/2) by a Householder rotation in the scaled coordinates: v = Z D^-1 y
    // with c^T y = 0, c the scaled coefficient image of q.
    Eigen::VectorXd c = dsi.asDiagonal() * (Z.transpose() * q);
    Eigen::MatrixXd P;
    if (c.norm() >= 1e-12 * q.norm()) {
        Eigen::VectorXd u = c / c.norm();
        u(0) += (u(0) >= 0 ? 1.0 : -1.0);
        u.normalize();
        Eigen::MatrixXd R =
            Eigen::MatrixXd::Identity(MG.rows(), MG.rows()) - 2.0 * u * u.transpose();
        P = R.rightCols(MG.rows() - 1);
        Eigen::MatrixXd MGp = symmetrize(P.transpose() * MG * P);
        Eigen::MatrixXd MAp = symmetrize(P.transpose() * MA * P);
        MG.swap(MGp);
        MA.swap(MAp);
    } else {
        P = Eigen::MatrixXd::Identity(MG.rows(), MG.rows());
    }

    Eigen::MatrixXd Lc = cholesky(MG);
    // B = L^-1 MA L^-T
    Eigen::MatrixXd B1 = Lc.triangularView<Eigen::Lower>().solve(MA);
    Eigen::MatrixXd B1t = B1.transpose();
    Eigen::MatrixXd B = symmetrize(Lc.triangularView<Eigen::Lower>().solve(B1t));
    SymEig eig = sym_eig(B);

    SpectralResult r;
    r.values = eig.values;
    // v = Z D^-1 P L^-T u (undoing the deflation and the Jacobi scaling)
    Eigen::MatrixXd U = Lc.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);
    r.vectors = Z * (dsi.asDiagonal() * (P * U));

    int m = int(r.values.size());
    r.parity.assign(m, '?');
    if (block == ParityBlock::Even)
        std::fill(r.parity.begin(), r.parity.end(), 'e');
    else if (block == ParityBlock::Odd)
        std::fill(r.parity.begin(), r.parity.end(), 'o');
    else if (sym) {
        auto pair = mirror_pairing(mesh, *sym);
        for (int k = 0; k < m; ++k) {
            Eigen::VectorXd v = r.vectors.col(k), pv(n);
            for (int i = 0; i < n; ++i)
                pv[i] = v[pair[i]];
            double nv = v.norm();
            if ((pv - v).norm() < 0.1 * nv)
                r.parity[k] = 'e';
            else if ((pv + v).norm() < 0.1 * nv)
                r.parity[k] = 'o';
        }
    }
    return r;
}

std::vector<Eigen::MatrixXcd> cyclic_projectors(const Mesh& mesh, const RotationSymmetry& rot) {
    auto perm = rotation_permutation(mesh, rot);
    int n = mesh.size(), r = rot.order;
    // Pi v (x) = v(iota(x)); as a matrix Pi_{i,j} = delta_{j, perm[i]}.
    std::vector<Eigen::MatrixXcd> P(r, Eigen::MatrixXcd::Zero(n, n));
    std::vector<int> power(n);
    for (int i = 0; i < n; ++i)
        power[i] = i;
    for (int j = 0; j < r; ++j) {
        for (int k = 0; k < r; ++k) {
            std::complex<double> c = std::polar(1.0 / r, -2.0 * kPi * j * k / r);
            for (int i = 0; i < n; ++i)
                P[k](i, power[i]) += c;
        }
        for (int i = 0; i < n; ++i)
            power[i] = perm[power[i]];
    }
    return P;
}

EssentialSpectrum predict_essential_spectrum(const Curve& curve, const ReflectionSymmetry& sym) {
    auto [f1, f2] = involution_fixed_points(sym);
    EssentialSpectrum es;
    std::vector<bool> used(curve.corners().size(), false);
    const auto& corners = curve.corners();
    for (size_t c = 0; c < corners.size(); ++c) {
        if (used[c])
            continue;
        double b = std::abs(0.5 - corners[c].half_exterior_angle / kPi);
        bool on_line = circ_dist(corners[c].t, f1) < 1e-9 || circ_dist(corners[c].t, f2) < 1e-9;
        if (on_line) {
            if (corners[c].outward) {
                es.even.hi = std::max(es.even.hi, b);
                es.odd.lo = std::min(es.odd.lo, -b);
            } else {
                es.even.lo = std::min(es.even.lo, -b);
                es.odd.hi = std::max(es.odd.hi, b);
            }
        } else {
            // Find and consume the mirror partner; the pair contributes the
            // full symmetric band to both parities.
            double tm = wrap01(sym.c - corners[c].t);
            for (size_t c2 = c + 1; c2 < corners.size(); ++c2)
                if (!used[c2] && circ_dist(corners[c2].t, tm) < 1e-9)
                    used[c2] = true;
            es.even.lo = std::min(es.even.lo, -b);
            es.even.hi = std::max(es.even.hi, b);
            es.odd.lo = std::min(es.odd.lo, -b);
            es.odd.hi = std::max(es.odd.hi, b);
        }
        used[c] = true;
    }
    return es;
}

EmbeddedScanResult embedded_scan(std::shared_ptr<const Curve> curve,
                                 const ReflectionSymmetry& sym, const EmbeddedOptions& opts) {
    if (opts.depths.size() < 3)
        throw std::invalid_argument("embedded_scan: need at least 3 refinement depths");
    EmbeddedScanResult out;
    out.depths = opts.depths;
    out.ess = predict_essential_spectrum(*curve, sym);

    for (int depth : opts.depths) {
        GradedOptions go;
        go.depth = depth;
        go.order = opts.order;
        go.sigma = opts.sigma;
        Mesh mesh = build_graded_mesh(curve, go);
        Eigen::MatrixXd Ks = assemble_k_star(mesh);
        Eigen::MatrixXd S = assemble_s(mesh);
        SGram gram = build_s_gram(mesh, S);
        auto even = solve_s_symmetric(mesh, Ks, gram, ParityBlock::Even, &sym);
        auto odd = solve_s_symmetric(mesh, Ks, gram, ParityBlock::Odd, &sym);
        out.even_values.emplace_back(even.values.data(), even.values.data() + even.values.size());
        out.odd_values.emplace_back(odd.values.data(), odd.values.data() + odd.values.size());
    }

    auto nearest = [](const std::vector<double>& v, double x) {
        double best = 1e300;
        for (double y : v)
            if (std::abs(y - x) < std::abs(best - x))
                best = y;
        return best;
    };
    size_t F = opts.depths.size() - 1;
    auto scan_parity = [&](const std::vector<std::vector<double>>& vals, char parity,
                           const Interval& own, const Interval& other) {
        for (double lam : vals[F]) {
            if (std::abs(lam) > 0.5 - 1e-6)
                continue;
            if (own.distance(lam) < opts.margin)
                continue; // inside (or too close to) its own essential band
            if (!other.contains(lam))
                continue; // not embedded in the opposite parity band
            double drift = 0.0, prev = lam;
            for (size_t l = F; l-- > 0;) {
                double m = nearest(vals[l], prev);
                drift = std::max(drift, std::abs(m - prev));
                prev = m;
            }
            if (drift < opts.stability_tol)
                out.candidates.push_back({lam, parity, drift});
        }
    };
    scan_parity(out.even_values, 'e', out.ess.even, out.ess.odd);
    scan_parity(out.odd_values, 'o', out.ess.odd, out.ess.even);
    std::sort(out.candidates.begin(), out.candidates.end(),
              [](const EmbeddedCandidate& a, const EmbeddedCandidate& b) {
                  return a.lambda < b.lambda;
              });
    return out;
}

double trig_interpolate(const Eigen::VectorXd& samples, double t) {
    int n = int(samples.size());
    if (n % 2 != 0)
        throw std::invalid_argument("trig_interpolate: need an even number of samples");
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        double u = t - double(j) / n;
        double su = std::sin(kPi * u);
        double kern;
        if (std::abs(su) < 1e-14) {
            kern = std::abs(std::cos(kPi * u)); // u near an integer: kernel -> 1
        } else {
            kern = std::sin(n * kPi * u) / (n * std::tan(kPi * u));
        }
        acc += samples[j] * kern;
    }
    return acc;
}

QuasimodeResult build_cutoff_quasimode(const Mesh& mesh, const TypeTPerturbation& pert,
                                       const Eigen::VectorXd& base_phi, double lambda,
                                       const Eigen::MatrixXd& Kstar, const SGram& gram) {
    int n = mesh.size();
    int nb = int(base_phi.size());
    const Curve& base = *pert.base;
    double Lb = base.total_length();
    QuasimodeResult qr;
    qr.psi = Eigen::VectorXd::Zero(n);

    // Base-grid arclength weights (speed / nb at the uniform nodes).
    auto speed = [&](double t) {
        const double h = 1e-6;
        return (base.position(t + h) - base.position(t - h)).norm() / (2.0 * h);
    };
    std::vector<double> wb(nb);
    double len_Aprime = 0.0;
    auto in_Aprime = [&](double tb) { return tb > pert.t2 && tb < pert.s2; };
    for (int j = 0; j < nb; ++j) {
        wb[j] = speed(double(j) / nb) / nb;
        if (in_Aprime(double(j) / nb))
            len_Aprime += wb[j];
    }
    double target = Lb - len_Aprime; // len(J) = len of the removed complement

    // Place J inside A' around the largest |phi| sample, growing greedily
    // while phi keeps its sign; phi must not change sign on J.
    int jstar = -1;
    for (int j = 0; j < nb; ++j)
        if (in_Aprime(double(j) / nb) &&
            (jstar < 0 || std::abs(base_phi[j]) > std::abs(base_phi[jstar])))
            jstar = j;
    if (jstar < 0)
        throw std::runtime_error("build_cutoff_quasimode: empty core region");
    double sgn = base_phi[jstar] >= 0 ? 1.0 : -1.0;
    double half_max = 0.5 * std::abs(base_phi[jstar]);
    int lo = jstar, hi = jstar;
    double len_J = wb[jstar];
    auto ok = [&](int j) {
        return in_Aprime(double(j) / nb) && sgn * base_phi[j] > half_max;
    };
    while (len_J < target) {
        bool can_lo = lo > 0 && ok(lo - 1);
        bool can_hi = hi + 1 < nb && ok(hi + 1);
        if (!can_lo && !can_hi)
            break;
        bool take_lo = can_lo && (!can_hi || sgn * base_phi[lo - 1] >= sgn * base_phi[hi + 1]);
        if (take_lo)
            len_J += wb[--lo];
        else
            len_J += wb[++hi];
    }
    qr.j_lo = (lo - 0.5) / nb;
    qr.j_hi = (hi + 0.5) / nb;
    auto in_J = [&](double tb) { return tb >= qr.j_lo && tb <= qr.j_hi; };

    // Transplant: psi = chi * phi with chi = 1 on A' \ J, a on J, 0 outside A'.
    std::vector<char> region(n, '0');
    double mass_one = 0.0, mass_J = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!pert.on_shared_arc(mesh.t[i]))
            continue;
        double tb = pert.base_arclength_of(mesh.t[i]) / Lb;
        if (!in_Aprime(tb))
            continue;
        double phi = trig_interpolate(base_phi, tb);
        qr.psi[i] = phi;
        if (in_J(tb)) {
            region[i] = 'J';
            mass_J += mesh.w[i] * phi;
        } else {
            region[i] = 'A';
            mass_one += mesh.w[i] * phi;
        }
    }
    if (mass_J == 0.0)
        throw std::runtime_error("build_cutoff_quasimode: empty plateau subarc J");
    qr.a = -mass_one / mass_J;
    if (std::abs(qr.a) >= 2.0)
        throw std::runtime_error("build_cutoff_quasimode: plateau constant out of range; "
                                 "invalid J placement");
    for (int i = 0; i < n; ++i)
        if (region[i] == 'J')
            qr.psi[i] *= qr.a;
    Eigen::VectorXd resid = Kstar * qr.psi - lambda * qr.psi;
    double num = std::sqrt(std::abs(resid.dot(gram.G * resid)));
    double den = std::sqrt(std::abs(qr.psi.dot(gram.G * qr.psi)));
    if (den == 0.0)
        throw std::runtime_error("build_cutoff_quasimode: zero quasimode");
    qr.epsilon = num / den;
    return qr;
}

double localized_mass_fraction(const Mesh& mesh, const Eigen::VectorXd& v,
                               double t_center, double radius) {
    double near = 0.0, total = 0.0;
    for (int i = 0; i < mesh.size(); ++i) {
        double m = mesh.w[i] * v[i] * v[i];
        total += m;
        if (circ_dist(mesh.t[i], t_center) < radius)
            near += m;
    }
    return total > 0.0 ? near / total : 0.0;
}

} // namespace nplab
