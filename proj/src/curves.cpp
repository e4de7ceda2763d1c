#include "nplab/curves.hpp"

#include "nplab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nplab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap01(double t) {
    double r = t - std::floor(t);
    return (r == 1.0) ? 0.0 : r;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Quintic polynomial on [x0,x1] matching value/first/second derivative at both ends.
struct Quintic {
    double x0 = 0.0, x1 = 0.0;
    std::array<double, 6> c{}; // coefficients in tau = (x - x0)/(x1 - x0)

    double h = 1.0;
    static Quintic fit(double x0, double x1, double y0, double d0, double dd0,
                       double y1, double d1, double dd1) {
        Quintic q;
        q.x0 = x0;
        q.x1 = x1;
        q.h = x1 - x0;
        double D0 = d0 * q.h, DD0 = dd0 * q.h * q.h;
        double D1 = d1 * q.h, DD1 = dd1 * q.h * q.h;
        // Hermite quintic in tau with f(0)=y0, f'(0)=D0, f''(0)=DD0, etc.
        q.c[0] = y0;
        q.c[1] = D0;
        q.c[2] = 0.5 * DD0;
        q.c[3] = 10 * (y1 - y0) - 6 * D0 - 4 * D1 - 1.5 * DD0 + 0.5 * DD1;
        q.c[4] = -15 * (y1 - y0) + 8 * D0 + 7 * D1 + 1.5 * DD0 - DD1;
        q.c[5] = 6 * (y1 - y0) - 3 * D0 - 3 * D1 - 0.5 * DD0 + 0.5 * DD1;
        return q;
    }
    double value(double x) const {
        double tau = (x - x0) / h;
        double v = 0.0;
        for (int k = 5; k >= 0; --k)
            v = v * tau + c[k];
        return v;
    }
    double deriv(double x) const {
        double tau = (x - x0) / h;
        double v = 0.0;
        for (int k = 5; k >= 1; --k)
            v = v * tau + k * c[k];
        return v / h;
    }
    double deriv2(double x) const {
        double tau = (x - x0) / h;
        double v = 0.0;
        for (int k = 5; k >= 2; --k)
            v = v * tau + k * (k - 1) * c[k];
        return v / (h * h);
    }
};

} // namespace

// ---------------------------------------------------------------------------
// ReflectionSymmetry

double ReflectionSymmetry::involve(double t) const { return wrap01(c - t); }

Vec2 ReflectionSymmetry::mirror(const Vec2& p) const {
    Vec2 d = line_dir.normalized();
    Vec2 v = p - line_point;
    return line_point + 2.0 * (v.dot(d)) * d - v;
}

// ---------------------------------------------------------------------------
// PieceGeom

void PieceGeom::init(int cells) {
    if (!p || !dp)
        throw std::invalid_argument("PieceGeom: missing evaluators");
    u_grid.resize(cells + 1);
    s_grid.resize(cells + 1);
    const GaussRule& g = gauss_legendre(15);
    double du = (u1 - u0) / cells;
    u_grid[0] = u0;
    s_grid[0] = 0.0;
    for (int k = 0; k < cells; ++k) {
        double a = u0 + k * du, b = u0 + (k + 1) * du;
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (size_t j = 0; j < g.nodes.size(); ++j)
            s += g.weights[j] * dp(mid + half * g.nodes[j]).norm();
        u_grid[k + 1] = b;
        s_grid[k + 1] = s_grid[k] + s * half;
    }
    length = s_grid.back();
}

static double partial_arclength(const PieceGeom& g, double ua, double ub) {
    const GaussRule& r = gauss_legendre(15);
    double mid = 0.5 * (ua + ub), half = 0.5 * (ub - ua);
    double s = 0.0;
    for (size_t j = 0; j < r.nodes.size(); ++j)
        s += r.weights[j] * g.dp(mid + half * r.nodes[j]).norm();
    return s * half;
}

double PieceGeom::u_of_s(double s) const {
    if (periodic) {
        s = std::fmod(s, length);
        if (s < 0.0)
            s += length;
    }
    s = std::clamp(s, 0.0, length);
    auto it = std::upper_bound(s_grid.begin(), s_grid.end(), s);
    size_t k = (it == s_grid.begin()) ? 0 : (it - s_grid.begin() - 1);
    if (k >= u_grid.size() - 1)
        k = u_grid.size() - 2;
    double ua = u_grid[k], ub = u_grid[k + 1];
    double target = s - s_grid[k];
    double u = ua + (ub - ua) * std::clamp(target / std::max(s_grid[k + 1] - s_grid[k], 1e-300), 0.0, 1.0);
    double tol = 1e-15 * std::max(1.0, length);
    for (int it2 = 0; it2 < 30; ++it2) {
        double f = partial_arclength(*this, ua, u) - target;
        if (std::abs(f) < tol)
            break;
        double d = dp(u).norm();
        double un = u - f / d;
        if (!(un > ua && un < ub))
            un = (f > 0) ? 0.5 * (ua + u) : 0.5 * (u + ub);
        u = un;
    }
    return u;
}

static double s_of_u(const PieceGeom& g, double u) {
    auto it = std::upper_bound(g.u_grid.begin(), g.u_grid.end(), u);
    size_t k = (it == g.u_grid.begin()) ? 0 : (it - g.u_grid.begin() - 1);
    if (k >= g.u_grid.size() - 1)
        k = g.u_grid.size() - 2;
    return g.s_grid[k] + partial_arclength(g, g.u_grid[k], u);
}

// ---------------------------------------------------------------------------
// Curve

void Curve::add_piece(Piece piece) {
    if (finalized_)
        throw std::logic_error("Curve: already finalized");
    pieces_.push_back(std::move(piece));
}

void Curve::add_symmetry(ReflectionSymmetry sym) { symmetries_.push_back(std::move(sym)); }
void Curve::add_rotation(RotationSymmetry rot) { rotations_.push_back(rot); }

static Vec2 geom_point(const Curve::Piece& pc, double s_local) {
    const PieceGeom& g = *pc.geom;
    return g.p(g.u_of_s(pc.s_begin + s_local));
}

static void geom_derivs(const Curve::Piece& pc, double s_local, Vec2& d1, Vec2& d2) {
    const PieceGeom& g = *pc.geom;
    double u = g.u_of_s(pc.s_begin + s_local);
    d1 = g.dp(u);
    d2 = g.ddp ? g.ddp(u) : Vec2(0, 0);
}

void Curve::finalize() {
    if (pieces_.empty())
        throw std::logic_error("Curve: no pieces");
    prefix_.resize(pieces_.size() + 1);
    prefix_[0] = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i)
        prefix_[i + 1] = prefix_[i] + pieces_[i].length();
    total_length_ = prefix_.back();
    if (total_length_ <= 0.0)
        throw std::invalid_argument("Curve: nonpositive length");

    // Continuity and corner detection at piece boundaries.
    corners_.clear();
    size_t n = pieces_.size();
    if (!(n == 1 && pieces_[0].geom->periodic)) {
        for (size_t i = 0; i < n; ++i) {
            const Piece& prev = pieces_[(i + n - 1) % n];
            const Piece& next = pieces_[i];
            Vec2 pe = geom_point(prev, prev.length());
            Vec2 ps = geom_point(next, 0.0);
            if ((pe - ps).norm() > 1e-9 * total_length_)
                throw std::invalid_argument("Curve: pieces do not connect");
            Vec2 d1a, d2a, d1b, d2b;
            geom_derivs(prev, prev.length(), d1a, d2a);
            geom_derivs(next, 0.0, d1b, d2b);
            Vec2 ta = d1a.normalized(), tb = d1b.normalized();
            double turn = std::atan2(cross2(ta, tb), ta.dot(tb));
            if (std::abs(turn) > 1e-9) {
                CornerTag tag;
                tag.t = prefix_[i] / total_length_;
                tag.half_exterior_angle = 0.5 * (kPi + turn);
                tag.outward = turn > 0.0;
                corners_.push_back(tag);
            }
        }
    }
    std::sort(corners_.begin(), corners_.end(),
              [](const CornerTag& a, const CornerTag& b) { return a.t < b.t; });
    finalized_ = true;
}

Curve::Local Curve::locate_s(double s) const {
    s = std::fmod(s, total_length_);
    if (s < 0.0)
        s += total_length_;
    auto it = std::upper_bound(prefix_.begin(), prefix_.end(), s);
    size_t i = (it == prefix_.begin()) ? 0 : (it - prefix_.begin() - 1);
    if (i >= pieces_.size())
        i = pieces_.size() - 1;
    return {i, s - prefix_[i]};
}

Vec2 Curve::position_at_arclength(double s) const {
    Local loc = locate_s(s);
    return geom_point(pieces_[loc.piece], loc.s_local);
}

Vec2 Curve::position(double t) const { return position_at_arclength(wrap01(t) * total_length_); }

void Curve::eval_derivs(double s, Vec2& d1, Vec2& d2) const {
    Local loc = locate_s(s);
    geom_derivs(pieces_[loc.piece], loc.s_local, d1, d2);
}

Vec2 Curve::tangent(double t) const {
    Vec2 d1, d2;
    eval_derivs(wrap01(t) * total_length_, d1, d2);
    return d1.normalized();
}

Vec2 Curve::outward_normal(double t) const {
    Vec2 tg = tangent(t);
    return Vec2(tg.y(), -tg.x());
}

double Curve::curvature(double t) const {
    Vec2 d1, d2;
    eval_derivs(wrap01(t) * total_length_, d1, d2);
    double n = d1.norm();
    return cross2(d1, d2) / (n * n * n);
}

static bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return cross2(q - p, r - p);
    };
    double o1 = orient(a, b, c), o2 = orient(a, b, d);
    double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

bool Curve::is_simple(int n) const {
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i)
        pts[i] = position(double(i) / n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1)
                continue; // adjacent through the wrap
            if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Constructors

std::shared_ptr<const Curve> make_circle(double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("make_circle: radius must be positive");
    auto geom = std::make_shared<PieceGeom>();
    double R = radius;
    geom->p = [R](double u) { return Vec2(R * std::cos(2 * kPi * u), R * std::sin(2 * kPi * u)); };
    geom->dp = [R](double u) {
        return Vec2(-2 * kPi * R * std::sin(2 * kPi * u), 2 * kPi * R * std::cos(2 * kPi * u));
    };
    geom->ddp = [R](double u) {
        double w = 2 * kPi;
        return Vec2(-w * w * R * std::cos(w * u), -w * w * R * std::sin(w * u));
    };
    geom->periodic = true;
    geom->init();
    auto c = std::make_shared<Curve>();
    c->add_piece({geom, 0.0, geom->length});
    c->add_symmetry({Vec2(0, 0), Vec2(1, 0), 0.0, "x-axis"});
    c->add_symmetry({Vec2(0, 0), Vec2(0, 1), 0.5, "y-axis"});
    c->add_rotation({2, Vec2(0, 0)});
    c->add_rotation({4, Vec2(0, 0)});
    c->finalize();
    return c;
}

static std::shared_ptr<PieceGeom> ellipse_geom(double R, double rho0) {
    double a = R * std::cosh(rho0), b = R * std::sinh(rho0);
    auto geom = std::make_shared<PieceGeom>();
    // omega = pi/2 + 2*pi*u: parameter origin at the top of the minor axis, CCW.
    geom->p = [a, b](double u) {
        double w = kPi / 2 + 2 * kPi * u;
        return Vec2(a * std::cos(w), b * std::sin(w));
    };
    geom->dp = [a, b](double u) {
        double w = kPi / 2 + 2 * kPi * u;
        return Vec2(-2 * kPi * a * std::sin(w), 2 * kPi * b * std::cos(w));
    };
    geom->ddp = [a, b](double u) {
        double w = kPi / 2 + 2 * kPi * u;
        double q = 4 * kPi * kPi;
        return Vec2(-q * a * std::cos(w), -q * b * std::sin(w));
    };
    geom->periodic = true;
    geom->init(2048);
    return geom;
}

std::shared_ptr<const Curve> make_ellipse(double R, double rho0) {
    if (!(R > 0.0))
        throw std::invalid_argument("make_ellipse: R must be positive");
    if (!(rho0 > 0.0))
        throw std::invalid_argument("make_ellipse: rho0 must be positive (degenerate ellipse)");
    auto geom = ellipse_geom(R, rho0);
    auto c = std::make_shared<Curve>();
    c->add_piece({geom, 0.0, geom->length});
    c->add_symmetry({Vec2(0, 0), Vec2(0, 1), 0.0, "minor-axis"});
    c->add_symmetry({Vec2(0, 0), Vec2(1, 0), 0.5, "major-axis"});
    c->add_rotation({2, Vec2(0, 0)});
    c->finalize();
    return c;
}

static std::shared_ptr<PieceGeom> arc_geom(const Vec2& center, double r, double phi0,
                                           double phi1) {
    auto geom = std::make_shared<PieceGeom>();
    geom->p = [center, r](double phi) {
        return Vec2(center + r * Vec2(std::cos(phi), std::sin(phi)));
    };
    geom->dp = [r](double phi) { return Vec2(r * Vec2(-std::sin(phi), std::cos(phi))); };
    geom->ddp = [r](double phi) { return Vec2(-r * Vec2(std::cos(phi), std::sin(phi))); };
    geom->u0 = phi0;
    geom->u1 = phi1;
    geom->init(512);
    return geom;
}

std::shared_ptr<const Curve> make_lens(double theta, double chord) {
    if (!(theta > 0.0 && theta < kPi))
        throw std::invalid_argument("make_lens: theta must lie in (0, pi)");
    if (theta == kPi / 2)
        throw std::invalid_argument("make_lens: theta = pi/2 has no corner");
    if (!(chord > 0.0))
        throw std::invalid_argument("make_lens: chord must be positive");
    double psi = kPi - theta;
    double hc = 0.5 * chord;
    double r = hc / std::sin(psi);
    double yc = hc / std::tan(psi);
    // Upper arc: center (0,-yc), B at angle pi/2-psi, A at pi/2+psi (CCW).
    auto up = arc_geom(Vec2(0, -yc), r, kPi / 2 - psi, kPi / 2 + psi);
    // Lower arc: center (0,+yc), A at -pi/2-psi, B at -pi/2+psi.
    auto lo = arc_geom(Vec2(0, yc), r, -kPi / 2 - psi, -kPi / 2 + psi);
    auto c = std::make_shared<Curve>();
    c->add_piece({up, 0.0, up->length});
    c->add_piece({lo, 0.0, lo->length});
    c->add_symmetry({Vec2(0, 0), Vec2(1, 0), 0.0, "chord"});
    c->add_symmetry({Vec2(0, 0), Vec2(0, 1), 0.5, "bisector"});
    c->finalize();
    return c;
}

// ---------------------------------------------------------------------------
// Type-T perturbation

namespace {

/// Endpoint data of a connector blend: position, unit tangent in traversal
/// direction, signed curvature (positive = turning left).
struct EndData {
    Vec2 P, T;
    double kappa;
};

/// Parametric quintic on u in [0,1] matching position, tangent direction and
/// curvature at both ends (G2 Hermite).  Parametrization speed at the ends is
/// set to the chord length, which keeps all derivative magnitudes O(1).
std::shared_ptr<PieceGeom> connector_geom(const EndData& a, const EndData& b) {
    double ell = (b.P - a.P).norm();
    Vec2 N0(-a.T.y(), a.T.x()), N1(-b.T.y(), b.T.x());
    Vec2 V0 = ell * a.T, V1 = ell * b.T;
    Vec2 A0 = ell * ell * a.kappa * N0, A1 = ell * ell * b.kappa * N1;
    Quintic qx = Quintic::fit(0, 1, a.P.x(), V0.x(), A0.x(), b.P.x(), V1.x(), A1.x());
    Quintic qy = Quintic::fit(0, 1, a.P.y(), V0.y(), A0.y(), b.P.y(), V1.y(), A1.y());
    auto geom = std::make_shared<PieceGeom>();
    geom->p = [qx, qy](double u) { return Vec2(qx.value(u), qy.value(u)); };
    geom->dp = [qx, qy](double u) { return Vec2(qx.deriv(u), qy.deriv(u)); };
    geom->ddp = [qx, qy](double u) { return Vec2(qx.deriv2(u), qy.deriv2(u)); };
    geom->init(512);
    return geom;
}

} // namespace

TypeTPerturbation make_type_t_perturbation(std::shared_ptr<const Curve> base,
                                           const Vec2& x0, double delta, double theta,
                                           double t2, double s2, double delta_prime,
                                           const TypeTOptions& opts) {
    if (!base)
        throw std::invalid_argument("type_t: null base curve");
    if (!base->corners().empty())
        throw std::invalid_argument("type_t: base curve must be smooth");
    if (base->pieces().size() != 1 || !base->pieces()[0].geom->periodic)
        throw std::invalid_argument("type_t: base curve must be a single periodic piece");
    double L0 = base->total_length();
    if ((base->position(0.0) - x0).norm() > 1e-9 * L0)
        throw std::invalid_argument("type_t: base must be parametrized with t=0 at x0");
    if (!(delta > 0.0) || !(delta_prime > 0.0) || !(delta_prime < 0.5 * delta))
        throw std::invalid_argument("type_t: need 0 < delta' < delta/2");
    if (!(theta > 0.0 && theta < kPi) || theta == kPi / 2)
        throw std::invalid_argument("type_t: invalid corner angle");

    // Junctions: where the base curve crosses radius 0.95*delta about x0, so
    // the blended arc has room to stay inside the closed disk of radius delta.
    double rj = 0.95 * delta;
    auto radius_at = [&](double t) { return (base->position(t) - x0).norm(); };
    auto find_crossing = [&](double dir) {
        double step = rj / (4.0 * L0); // parameter step ~ rj/4 of arclength
        double t_in = 0.0, t_out = 0.0;
        bool found = false;
        for (int k = 1; k <= 4096; ++k) {
            double t = dir * k * step;
            if (radius_at(t) > rj) {
                t_out = t;
                t_in = dir * (k - 1) * step;
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("type_t: disk swallows the base curve");
        for (int k = 0; k < 80; ++k) {
            double tm = 0.5 * (t_in + t_out);
            (radius_at(tm) > rj ? t_out : t_in) = tm;
        }
        return 0.5 * (t_in + t_out);
    };
    double t1 = find_crossing(+1.0);
    double s1_neg = find_crossing(-1.0); // negative parameter
    double s1 = 1.0 + s1_neg;

    // Symmetric construction when x0 lies on a reflection axis of the base.
    const ReflectionSymmetry* sym = nullptr;
    for (const auto& s : base->symmetries())
        if (std::abs(s.involve(0.0)) < 1e-12 || std::abs(s.involve(0.0) - 1.0) < 1e-12)
            sym = &s;
    if (sym) {
        t1 = 0.5 * (t1 + (1.0 - s1));
        s1 = 1.0 - t1;
    }
    if (!(0 < t1 && t1 < t2 && t2 < s2 && s2 < s1 && s1 < 1))
        throw std::invalid_argument("type_t: parameter ordering 0<t1<t2<s2<s1<1 violated");
    // Single-arc intersection check (Definition of the perturbation, part (b)).
    for (int k = 1; k < 512; ++k) {
        double t = t1 + (s1 - t1) * k / 512.0;
        if (radius_at(t) < rj)
            throw std::invalid_argument("type_t: disk intersects base curve in several arcs");
    }

    // Local frame at x0: e_eta = outward normal, (e_xi, e_eta) right-handed.
    Vec2 e_eta = base->outward_normal(0.0);
    Vec2 e_xi(e_eta.y(), -e_eta.x());

    // Corner prototype: two circular arcs from a lens with half exterior angle
    // theta and chord 4*delta', rotated so the corner bisector is vertical,
    // tip at the origin of the local frame (= x0).
    double psi = kPi - theta;
    double cp = 4.0 * delta_prime;
    double rp = 0.5 * cp / std::sin(psi);
    Vec2 oL(0.5 * cp / std::tan(psi), -0.5 * cp);
    Vec2 oR(-0.5 * cp / std::tan(psi), -0.5 * cp);
    double dphi = 2.0 * std::asin(delta_prime / (2.0 * rp));
    double phiL0 = kPi - psi;          // tip angle on the left-branch circle
    double phiR1 = psi;                // tip angle on the right-branch circle

    // All lambdas stored in geometries must capture the frame by value.
    Vec2 origin = x0, exv = e_xi, eev = e_eta;
    auto frame_pt = [origin, exv, eev](const Vec2& local) {
        return Vec2(origin + local.x() * exv + local.y() * eev);
    };
    auto arc_in_frame = [rp, frame_pt, exv, eev](const Vec2& olocal, double a, double b) {
        auto geom = std::make_shared<PieceGeom>();
        Vec2 oc = olocal;
        geom->p = [oc, rp, frame_pt](double phi) {
            Vec2 l = oc + rp * Vec2(std::cos(phi), std::sin(phi));
            return frame_pt(l);
        };
        geom->dp = [rp, exv, eev](double phi) {
            Vec2 l = rp * Vec2(-std::sin(phi), std::cos(phi));
            return Vec2(l.x() * exv + l.y() * eev);
        };
        geom->ddp = [rp, exv, eev](double phi) {
            Vec2 l = -rp * Vec2(std::cos(phi), std::sin(phi));
            return Vec2(l.x() * exv + l.y() * eev);
        };
        geom->u0 = a;
        geom->u1 = b;
        geom->init(256);
        return geom;
    };
    auto left_branch = arc_in_frame(oL, phiL0, phiL0 + dphi);
    auto right_branch = arc_in_frame(oR, phiR1 - dphi, phiR1);

    auto frame_vec = [&](const Vec2& local) {
        return Vec2(local.x() * e_xi + local.y() * e_eta);
    };
    // Branch far endpoints: position, traversal tangent, curvature (world).
    double phiLe = phiL0 + dphi, phiRs = phiR1 - dphi;
    EndData beL{frame_pt(oL + rp * Vec2(std::cos(phiLe), std::sin(phiLe))),
                frame_vec(Vec2(-std::sin(phiLe), std::cos(phiLe))), 1.0 / rp};
    EndData bsR{frame_pt(oR + rp * Vec2(std::cos(phiRs), std::sin(phiRs))),
                frame_vec(Vec2(-std::sin(phiRs), std::cos(phiRs))), 1.0 / rp};
    // Junction data on the base curve (traversal = base CCW direction).
    EndData j1{base->position(t1), base->tangent(t1), base->curvature(t1)};
    EndData j2{base->position(s1), base->tangent(s1), base->curvature(s1)};
    if (sym) {
        // Enforce exact mirror symmetry of the right junction data.
        Eigen::Matrix2d H = 2.0 * e_eta * e_eta.transpose() - Eigen::Matrix2d::Identity();
        j2.P = x0 + H * (j1.P - x0);
        j2.T = -(H * j1.T);
        j2.kappa = j1.kappa;
    }

    // C2 connectors: branch end -> left junction, right junction -> branch start.
    auto leftConn = connector_geom(beL, j1);
    auto rightConn = connector_geom(j2, bsR);

    // Lipschitz-graph and disk-containment validation over the replacement arc.
    double max_slope = std::abs(std::tan(kPi / 2 - theta));
    for (const auto& conn : {leftConn, rightConn}) {
        for (int k = 0; k <= opts.validate_samples; ++k) {
            double u = double(k) / opts.validate_samples;
            if ((conn->p(u) - x0).norm() > delta)
                throw std::invalid_argument("type_t: replacement arc leaves the disk");
            Vec2 d = conn->dp(u);
            double dxi = d.dot(e_xi);
            if (std::abs(dxi) < 1e-12 * d.norm())
                throw std::invalid_argument("type_t: replacement arc is not a graph");
            max_slope = std::max(max_slope, std::abs(d.dot(e_eta) / dxi));
        }
    }
    if (max_slope > opts.lipschitz_bound)
        throw std::invalid_argument("type_t: Lipschitz slope bound exceeded (" +
                                    std::to_string(max_slope) + ")");

    // Assemble the realized curve: left branch, left connector, shared base
    // arc, right connector, right branch.  CCW starts at the corner tip.
    const Curve::Piece& bp = base->pieces()[0];
    double base_s_t1 = t1 * L0, base_s_s1 = s1 * L0;

    auto curve = std::make_shared<Curve>();
    curve->add_piece({left_branch, 0.0, left_branch->length});
    curve->add_piece({leftConn, 0.0, leftConn->length});
    curve->add_piece({bp.geom, bp.s_begin + base_s_t1, bp.s_begin + base_s_s1});
    curve->add_piece({rightConn, 0.0, rightConn->length});
    curve->add_piece({right_branch, 0.0, right_branch->length});
    if (sym)
        curve->add_symmetry({x0, e_eta, 0.0, sym->name});
    curve->finalize();

    if (curve->corners().size() != 1)
        throw std::runtime_error("type_t: expected exactly one corner, got " +
                                 std::to_string(curve->corners().size()));

    TypeTPerturbation p;
    p.base = base;
    p.realized = curve;
    p.delta = delta;
    p.delta_prime = delta_prime;
    p.theta = theta;
    p.t1 = t1;
    p.t2 = t2;
    p.s2 = s2;
    p.s1 = s1;
    p.base_s_t1 = base_s_t1;
    p.base_s_s1 = base_s_s1;
    p.realized_s_t1 = curve->piece_start_arclength(2);
    return p;
}

double TypeTPerturbation::base_arclength_of(double t_realized) const {
    double s = wrap01(t_realized) * realized->total_length() - realized_s_t1;
    return base_s_t1 + s;
}

double TypeTPerturbation::realized_param_of(double t_base) const {
    double s = t_base * base->total_length() - base_s_t1;
    return (realized_s_t1 + s) / realized->total_length();
}

bool TypeTPerturbation::on_shared_arc(double t_realized) const {
    double s = wrap01(t_realized) * realized->total_length();
    return s >= realized_s_t1 && s <= realized_s_t1 + (base_s_s1 - base_s_t1);
}

PerturbationMetrics perturbation_metrics(const TypeTPerturbation& p) {
    PerturbationMetrics m;
    m.len_D = p.realized->total_length() - (p.base_s_s1 - p.base_s_t1);

    // dist(A', D): A' = base[(t2,s2)], D = replacement arc.  Sampled minimum
    // with local subdivision refinement.
    const int nA = 1024, nD = 1024;
    std::vector<Vec2> A(nA), D(nD);
    auto a_pt = [&](double q) { return p.base->position(p.t2 + (p.s2 - p.t2) * q); };
    double lenD_param = m.len_D / p.realized->total_length();
    auto d_pt = [&](double q) {
        // D occupies realized params outside the shared arc; fold it to
        // [shared_end, 1+shared_start].
        double ts = (p.realized_s_t1 + (p.base_s_s1 - p.base_s_t1)) / p.realized->total_length();
        return p.realized->position(ts + lenD_param * q);
    };
    double qa_lo = 0.0, qa_hi = 1.0, qd_lo = 0.0, qd_hi = 1.0;
    double best = std::numeric_limits<double>::max();
    for (int pass = 0; pass < 8; ++pass) {
        double best_qa = qa_lo, best_qd = qd_lo;
        for (int i = 0; i <= nA; ++i) {
            double qa = qa_lo + (qa_hi - qa_lo) * i / nA;
            Vec2 pa = a_pt(qa);
            for (int j = 0; j <= 64; ++j) {
                double qd = qd_lo + (qd_hi - qd_lo) * j / 64;
                double d = (pa - d_pt(qd)).norm();
                if (d < best) {
                    best = d;
                    best_qa = qa;
                    best_qd = qd;
                }
            }
        }
        double wa = (qa_hi - qa_lo) / nA * 4, wd = (qd_hi - qd_lo) / 64 * 4;
        qa_lo = std::max(0.0, best_qa - wa);
        qa_hi = std::min(1.0, best_qa + wa);
        qd_lo = std::max(0.0, best_qd - wd);
        qd_hi = std::min(1.0, best_qd + wd);
    }
    m.dist_Aprime_D = best;
    m.ratio = std::sqrt(m.len_D) / m.dist_Aprime_D;
    return m;
}

// ---------------------------------------------------------------------------
// Corner-attached ellipse (non-smoothed attachment)

std::shared_ptr<const Curve> make_corner_attached_ellipse(double R, double rho0,
                                                          double omega_halfwidth) {
    if (!(R > 0.0) || !(rho0 > 0.0))
        throw std::invalid_argument("corner_attached_ellipse: invalid ellipse parameters");
    if (!(omega_halfwidth > 0.0 && omega_halfwidth < kPi / 4))
        throw std::invalid_argument("corner_attached_ellipse: omega_halfwidth out of range");
    double a = R * std::cosh(rho0), b = R * std::sinh(rho0);
    double sw = std::sin(omega_halfwidth), cw = std::cos(omega_halfwidth);
    Vec2 Pl(-a * sw, b * cw), Pr(a * sw, b * cw);
    Vec2 tip(0.0, b * cw + a * sw);

    auto seg_geom = [](const Vec2& from, const Vec2& to) {
        auto geom = std::make_shared<PieceGeom>();
        Vec2 d = to - from;
        geom->p = [from, d](double u) { return Vec2(from + u * d); };
        geom->dp = [d](double) { return d; };
        geom->ddp = [](double) { return Vec2(0, 0); };
        geom->init(16);
        return geom;
    };
    auto left = seg_geom(tip, Pl);
    auto right = seg_geom(Pr, tip);
    auto egeom = ellipse_geom(R, rho0);
    double ul = omega_halfwidth / (2 * kPi);
    double s_l = s_of_u(*egeom, ul);
    double s_r = egeom->length - s_l; // mirror-symmetric by construction

    auto c = std::make_shared<Curve>();
    c->add_piece({left, 0.0, left->length});
    c->add_piece({egeom, s_l, s_r});
    c->add_piece({right, 0.0, right->length});
    c->add_symmetry({Vec2(0, 0), Vec2(0, 1), 0.0, "minor-axis"});
    c->finalize();
    if (c->corners().size() != 3)
        throw std::runtime_error("corner_attached_ellipse: expected 3 corners");
    return c;
}

void export_curve_csv(const Curve& curve, int n, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("export_curve_csv: cannot open " + path);
    f << "t,x,y,nx,ny,kappa\n";
    f.precision(17);
    for (int i = 0; i < n; ++i) {
        double t = double(i) / n;
        Vec2 p = curve.position(t), nn = curve.outward_normal(t);
        f << t << ',' << p.x() << ',' << p.y() << ',' << nn.x() << ',' << nn.y() << ','
          << curve.curvature(t) << '\n';
    }
}

} // namespace nplab
