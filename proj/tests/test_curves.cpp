#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nplab/curves.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace nplab;
namespace {
constexpr double kPi = 3.14159265358979323846;
double rho0_37() { return std::atanh(3.0 / 7.0); }
} // namespace

TEST_CASE("circle geometry") {
    auto c = make_circle(2.0);
    CHECK(c->total_length() == doctest::Approx(4.0 * kPi).epsilon(1e-13));
    CHECK(c->corners().empty());
    CHECK(c->is_simple());
    for (double t : {0.0, 0.13, 0.5, 0.77}) {
        CHECK(c->position(t).norm() == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(c->curvature(t) == doctest::Approx(0.5).epsilon(1e-10));
        // Outward normal points away from the center.
        CHECK(c->outward_normal(t).dot(c->position(t).normalized()) ==
              doctest::Approx(1.0).epsilon(1e-12));
        // Unit tangent.
        CHECK(c->tangent(t).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    REQUIRE(c->symmetries().size() >= 2);
}

TEST_CASE("ellipse semi-axes and symmetries") {
    double rho0 = rho0_37();
    auto e = make_ellipse(1.0, rho0);
    // Confocal parametrization: semi-major cosh(rho0), semi-minor sinh(rho0).
    CHECK(e->position(0.0).x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e->position(0.0).y() == doctest::Approx(std::sinh(rho0)).epsilon(1e-12));
    CHECK(e->position(0.25).x() == doctest::Approx(-std::cosh(rho0)).epsilon(1e-12));
    CHECK(e->is_simple());
    CHECK(e->corners().empty());
    REQUIRE(e->symmetries().size() == 2);
    REQUIRE(e->rotations().size() == 1);
    CHECK(e->rotations()[0].order == 2);

    for (const auto& sym : e->symmetries()) {
        for (double t : {0.03, 0.21, 0.58, 0.9}) {
            Vec2 pm = sym.mirror(e->position(t));
            Vec2 pi = e->position(sym.involve(t));
            CHECK((pm - pi).norm() == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-10));
        }
    }
}

TEST_CASE("lens corners, outward and inward") {
    auto lo = make_lens(0.75 * kPi, 1.0);
    REQUIRE(lo->corners().size() == 2);
    for (const auto& c : lo->corners()) {
        CHECK(c.half_exterior_angle == doctest::Approx(0.75 * kPi).epsilon(1e-10));
        CHECK(c.outward);
    }
    CHECK(std::abs(lo->position(lo->corners()[0].t).x()) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lo->position(lo->corners()[0].t).y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lo->is_simple());
    REQUIRE(lo->symmetries().size() == 2);

    auto li = make_lens(0.3 * kPi, 1.0);
    REQUIRE(li->corners().size() == 2);
    for (const auto& c : li->corners()) {
        CHECK(c.half_exterior_angle == doctest::Approx(0.3 * kPi).epsilon(1e-10));
        CHECK_FALSE(c.outward);
    }
    CHECK(li->is_simple());
}

TEST_CASE("type-T perturbation of the circle") {
    auto base = make_circle(1.0);
    Vec2 x0 = base->position(0.0);
    double delta = 0.3, theta = 0.8 * kPi;
    auto p = make_type_t_perturbation(base, x0, delta, theta, 0.10, 0.90, 0.05);

    CHECK(p.t1 == doctest::Approx(0.04551409).epsilon(1e-5));
    CHECK(p.s1 == doctest::Approx(1.0 - p.t1).epsilon(1e-10));
    REQUIRE(p.realized->corners().size() == 1);
    CHECK(p.realized->corners()[0].half_exterior_angle ==
          doctest::Approx(theta).epsilon(1e-10));
    CHECK(p.realized->corners()[0].outward);
    CHECK(p.realized->is_simple());
    REQUIRE(p.realized->symmetries().size() == 1);

    // Shared arc: realized and base coincide through the parameter maps.
    for (double tb : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double tr = p.realized_param_of(tb);
        CHECK(p.on_shared_arc(tr));
        CHECK((p.realized->position(tr) - base->position(tb)).norm() ==
              doctest::Approx(0.0).scale(1).epsilon(1e-10));
        CHECK(p.base_arclength_of(tr) ==
              doctest::Approx(tb * base->total_length()).epsilon(1e-10));
    }

    // The replacement stays inside the closed delta-disk around x0.
    double tr1 = p.realized_s_t1 / p.realized->total_length();
    for (int k = 0; k <= 200; ++k) {
        double tr = -tr1 + 2.0 * tr1 * k / 200; // replaced region around t=0
        tr -= std::floor(tr);
        if (p.on_shared_arc(tr))
            continue;
        CHECK((p.realized->position(tr) - x0).norm() <= delta + 1e-10);
    }
    auto met = perturbation_metrics(p);
    CHECK(met.len_D == doctest::Approx(0.69202935).epsilon(1e-5));
    CHECK(met.dist_Aprime_D == doctest::Approx(0.34067572).epsilon(1e-5));
    CHECK(met.ratio == doctest::Approx(std::sqrt(met.len_D) / met.dist_Aprime_D).epsilon(1e-10));
}

TEST_CASE("type-T rejects impossible geometry") {
    auto base = make_circle(1.0);
    // Corner angle outside the curve's reach at huge Lipschitz demand.
    TypeTOptions opts;
    opts.lipschitz_bound = 0.05;
    CHECK_THROWS(make_type_t_perturbation(base, base->position(0.0), 0.3, 0.8 * kPi, 0.1, 0.9,
                                          0.05, opts));
}

TEST_CASE("corner-attached ellipse") {
    auto h = make_corner_attached_ellipse(1.0, rho0_37(), 0.25);
    REQUIRE(h->corners().size() == 3);
    const auto& cs = h->corners();
    // Tip: outward, half exterior angle 3 pi / 4, on the symmetry line at t=0.
    CHECK(cs[0].t == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(cs[0].half_exterior_angle == doctest::Approx(0.75 * kPi).epsilon(1e-10));
    CHECK(cs[0].outward);
    // Attachment corners: inward mirror pair off the line.
    CHECK(cs[1].half_exterior_angle == doctest::Approx(1.232596510991).epsilon(1e-8));
    CHECK(cs[2].half_exterior_angle == doctest::Approx(cs[1].half_exterior_angle).epsilon(1e-12));
    CHECK_FALSE(cs[1].outward);
    CHECK_FALSE(cs[2].outward);
    CHECK(cs[1].t + cs[2].t == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::min(cs[1].t, 1.0 - cs[2].t) == doctest::Approx(0.07179458959).epsilon(1e-5));
    CHECK(h->is_simple());
    REQUIRE(h->symmetries().size() >= 1);
    CHECK(h->symmetries()[0].name == "minor-axis");
}

TEST_CASE("curve csv export") {
    auto c = make_circle(1.0);
    auto path = std::filesystem::temp_directory_path() / "nplab_test_curve.csv";
    export_curve_csv(*c, 64, path.string());
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
}
