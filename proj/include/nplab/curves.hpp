#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nplab {

using Vec2 = Eigen::Vector2d;

/// Corner of a piecewise-smooth curve.  `half_exterior_angle` is half the
/// angle at the corner measured in the exterior domain; outward corners have
/// pi/2 < theta < pi, inward ones 0 < theta < pi/2.
struct CornerTag {
    double t = 0.0;
    double half_exterior_angle = 0.0;
    bool outward = false;
};

/// Mirror symmetry of a curve about a line.  For arclength-proportional
/// parametrizations the induced parameter involution is t -> (c - t) mod 1.
struct ReflectionSymmetry {
    Vec2 line_point{0, 0};
    Vec2 line_dir{1, 0}; // unit
    double c = 0.0;
    std::string name;    // e.g. "major-axis"

    double involve(double t) const;
    Vec2 mirror(const Vec2& p) const;
};

/// Cyclic rotational symmetry: rotation by 2*pi/order about `center` maps the
/// curve to itself; in parameter space t -> t + 1/order.
struct RotationSymmetry {
    int order = 1;
    Vec2 center{0, 0};
};

/// Analytic description of one smooth piece in its natural parameter u,
/// together with arclength tables built by init().
struct PieceGeom {
    std::function<Vec2(double)> p, dp, ddp;
    double u0 = 0.0, u1 = 1.0;
    bool periodic = false;

    double length = 0.0;
    std::vector<double> u_grid, s_grid; // cumulative arclength at grid points

    void init(int cells = 1024);
    /// Natural parameter at arclength s from u0 (s in [0, length], wraps if periodic).
    double u_of_s(double s) const;
};

/// Closed planar curve, parametrized proportionally to arclength on [0,1).
/// Immutable after finalize().
class Curve {
public:
    /// Sub-arc [s_begin, s_end] (arclength within geom) of a shared geometry.
    struct Piece {
        std::shared_ptr<const PieceGeom> geom;
        double s_begin = 0.0, s_end = 0.0; // s_end may exceed geom->length if periodic
        double length() const { return s_end - s_begin; }
    };

    void add_piece(Piece piece);
    void add_symmetry(ReflectionSymmetry sym);
    void add_rotation(RotationSymmetry rot);
    /// Joins the pieces into a closed curve: checks endpoint continuity,
    /// detects corners from tangent jumps, accumulates lengths.
    void finalize();

    Vec2 position(double t) const;
    Vec2 position_at_arclength(double s) const;
    Vec2 tangent(double t) const;        // unit, CCW orientation
    Vec2 outward_normal(double t) const; // tangent rotated by -pi/2
    double curvature(double t) const;    // signed; circle: +1/R
    double total_length() const { return total_length_; }

    const std::vector<CornerTag>& corners() const { return corners_; }
    const std::vector<ReflectionSymmetry>& symmetries() const { return symmetries_; }
    const std::vector<RotationSymmetry>& rotations() const { return rotations_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    /// Global parameter of the start of piece i.
    double piece_start_param(size_t i) const { return prefix_[i] / total_length_; }
    double piece_start_arclength(size_t i) const { return prefix_[i]; }

    /// Pairwise segment-intersection check on an n-point sampling.
    bool is_simple(int n = 2048) const;

private:
    struct Local {
        size_t piece;
        double s_local;
    };
    Local locate_s(double s) const;
    void eval_derivs(double s, Vec2& d1, Vec2& d2) const; // dp/du, ddp/du^2 at the point

    std::vector<Piece> pieces_;
    std::vector<double> prefix_; // prefix_[i] = arclength at start of piece i; size n+1
    double total_length_ = 0.0;
    std::vector<CornerTag> corners_;
    std::vector<ReflectionSymmetry> symmetries_;
    std::vector<RotationSymmetry> rotations_;
    bool finalized_ = false;
};

std::shared_ptr<const Curve> make_circle(double radius);

/// Ellipse in elliptic coordinates: foci (+-R, 0), boundary rho = rho0.
/// Parameter origin t=0 at the top of the minor axis, CCW.
/// Symmetries: "minor-axis" (c=0) and "major-axis" (c=1/2).
std::shared_ptr<const Curve> make_ellipse(double R, double rho0);

/// Boundary of the union/intersection of two equal disks.  `theta` is the half
/// exterior angle at the two tips, `chord` the tip-to-tip distance.  Tips at
/// (+-chord/2, 0); t=0 at the right tip, CCW.  Symmetries: "chord" (c=0) and
/// "bisector" (c=1/2).
std::shared_ptr<const Curve> make_lens(double theta, double chord);

struct TypeTPerturbation {
    std::shared_ptr<const Curve> base;
    std::shared_ptr<const Curve> realized;
    double delta = 0.0, delta_prime = 0.0, theta = 0.0;
    double t1 = 0.0, t2 = 0.0, s2 = 0.0, s1 = 0.0; // base parameters, 0<t1<t2<s2<s1<1
    // Arclength bookkeeping for the shared arc A = base[(t1,s1)]:
    double base_s_t1 = 0.0, base_s_s1 = 0.0;   // base arclengths of the junctions
    double realized_s_t1 = 0.0;                // realized arclength at the t1 junction

    /// Base-curve arclength corresponding to realized parameter t (valid on A).
    double base_arclength_of(double t_realized) const;
    /// Realized parameter corresponding to base parameter t in (t1, s1).
    double realized_param_of(double t_base) const;
    /// True if realized parameter t lies on the shared arc A.
    bool on_shared_arc(double t_realized) const;
};

struct TypeTOptions {
    double lipschitz_bound = 10.0; // reject if the graph slope exceeds this
    int validate_samples = 512;
};

/// Replaces the arc of `base` inside the disk |x - x0| <= delta by a curve D
/// carrying one corner with half exterior angle theta; D joins the base curve
/// with C^2 quintic blends and its corner neighborhood is a translated-rotated
/// lens corner (disk radius delta_prime).  Requires base parametrized with
/// t=0 at x0.
TypeTPerturbation make_type_t_perturbation(std::shared_ptr<const Curve> base,
                                           const Vec2& x0, double delta, double theta,
                                           double t2, double s2, double delta_prime,
                                           const TypeTOptions& opts = {});

struct PerturbationMetrics {
    double len_D = 0.0;
    double dist_Aprime_D = 0.0;
    double ratio = 0.0; // sqrt(len_D) / dist(A', D)
};
PerturbationMetrics perturbation_metrics(const TypeTPerturbation& p);

/// Ellipse with an outward corner (half exterior angle 3*pi/4) attached over
/// the top of the minor axis without smoothing: two straight segments at 45
/// degrees meet at a tip on the minor axis, creating two mirror-pair inward
/// corners at the attachment points (omega = pi/2 +- omega_halfwidth).
/// t=0 at the tip; symmetry "minor-axis" (c=0).
std::shared_ptr<const Curve> make_corner_attached_ellipse(double R, double rho0,
                                                          double omega_halfwidth);

/// Writes an n-point sampling as CSV: t,x,y,nx,ny,kappa.
void export_curve_csv(const Curve& curve, int n, const std::string& path);

} // namespace nplab
