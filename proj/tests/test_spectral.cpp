#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nplab/spectral.hpp"

#include <cmath>

using namespace nplab;
namespace {
constexpr double kPi = 3.14159265358979323846;

struct EllipseSetup {
    std::shared_ptr<const Curve> curve;
    Mesh mesh;
    Eigen::MatrixXd Ks;
    SGram gram;
};

EllipseSetup ellipse_setup(int N) {
    EllipseSetup s;
    s.curve = make_ellipse(1.0, std::atanh(3.0 / 7.0));
    s.mesh = build_uniform_mesh(s.curve, N);
    s.Ks = assemble_k_star(s.mesh);
    s.gram = build_s_gram(s.mesh, assemble_s(s.mesh));
    return s;
}

double nearest(const Eigen::VectorXd& v, double x) {
    double best = 1e300;
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v[i] - x) < std::abs(best - x))
            best = v[i];
    return best;
}
} // namespace

TEST_CASE("ellipse closed-form spectrum with parities") {
    auto s = ellipse_setup(256);
    double rho0 = std::atanh(3.0 / 7.0);
    const ReflectionSymmetry* minor = &s.curve->symmetries()[0];
    REQUIRE(minor->name == "minor-axis");
    auto r = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Full, minor);
    CHECK(r.values.size() == 255); // the 1/2 eigenvalue is deflated

    for (int n = 1; n <= 5; ++n) {
        double alpha = 0.5 * std::exp(-2.0 * n * rho0);
        for (int sgn : {+1, -1}) {
            double target = sgn * alpha;
            int best = 0;
            double bd = 1e300;
            for (int k = 0; k < r.values.size(); ++k)
                if (std::abs(r.values[k] - target) < bd) {
                    bd = std::abs(r.values[k] - target);
                    best = k;
                }
            CHECK(bd < 1e-10);
            // Minor axis: parities alternate, +alpha_1 odd.
            char expect = ((n % 2 != 0) == (sgn > 0)) ? 'o' : 'e';
            CHECK(r.parity[best] == expect);
            // S-normalization of eigenvectors.
            double snorm = r.vectors.col(best).dot(s.gram.G * r.vectors.col(best));
            CHECK(snorm == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // alpha_1 and alpha_2 are the rationals 1/5 and 2/25.
    CHECK(std::abs(nearest(r.values, 0.2) - 0.2) < 1e-10);
    CHECK(std::abs(nearest(r.values, 0.08) - 0.08) < 1e-10);
}

TEST_CASE("parity blocks decompose the full spectrum") {
    auto s = ellipse_setup(128);
    const ReflectionSymmetry* minor = &s.curve->symmetries()[0];
    auto re = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Even, minor);
    auto ro = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Odd, minor);
    CHECK(re.values.size() + ro.values.size() == 127);
    // Block values reappear in the full spectrum.
    auto rf = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Full, minor);
    for (double v : {re.values[re.values.size() - 1], ro.values[ro.values.size() - 1]})
        CHECK(std::abs(nearest(rf.values, v) - v) < 1e-10);
}

TEST_CASE("parity cross-block norm vanishes") {
    auto s = ellipse_setup(128);
    const ReflectionSymmetry& sym = s.curve->symmetries()[0];
    Eigen::MatrixXd Ze = parity_basis(s.mesh, sym, true);
    Eigen::MatrixXd Zo = parity_basis(s.mesh, sym, false);
    CHECK((Ze.transpose() * Ze - Eigen::MatrixXd::Identity(Ze.cols(), Ze.cols())).norm() <
          1e-12);
    CHECK((Ze.transpose() * s.Ks * Zo).norm() / s.Ks.norm() < 1e-10);
    CHECK((Zo.transpose() * s.Ks * Ze).norm() / s.Ks.norm() < 1e-10);
}

TEST_CASE("plus-minus parity swap about the major axis") {
    auto s = ellipse_setup(256);
    const ReflectionSymmetry* major = nullptr;
    for (const auto& sym : s.curve->symmetries())
        if (sym.name == "major-axis")
            major = &sym;
    REQUIRE(major);
    auto r = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Full, major);
    for (int k = 0; k < r.values.size(); ++k) {
        double lam = r.values[k];
        if (lam < 1e-6 || r.parity[k] == '?')
            continue;
        // Positive eigenvalues are even about the major axis; -lam exists
        // with the opposite parity.
        CHECK(r.parity[k] == 'e');
        CHECK(std::abs(nearest(r.values, -lam) + lam) < 1e-8);
    }
}

TEST_CASE("deflated circle spectrum collapses to zero") {
    auto c = make_circle(1.0); // logarithmic capacity 1: G singular on constants
    auto m = build_uniform_mesh(c, 64);
    auto Ks = assemble_k_star(m);
    auto g = build_s_gram(m, assemble_s(m));
    CHECK_FALSE(g.full_pd);
    auto r = solve_s_symmetric(m, Ks, g);
    CHECK(r.values.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("cyclic projectors resolve the rotation action") {
    auto s = ellipse_setup(64);
    auto P = cyclic_projectors(s.mesh, s.curve->rotations()[0]);
    REQUIRE(P.size() == 2);
    Eigen::MatrixXcd sum = P[0] + P[1];
    CHECK((sum - Eigen::MatrixXcd::Identity(64, 64)).norm() < 1e-12);
    for (const auto& p : P) {
        CHECK((p * p - p).norm() < 1e-12);
        CHECK((p * s.Ks - s.Ks * p).norm() / s.Ks.norm() < 1e-12);
    }
}

TEST_CASE("essential spectrum prediction") {
    auto lo = make_lens(0.75 * kPi, 1.0);
    auto el = predict_essential_spectrum(*lo, lo->symmetries()[0]); // chord
    CHECK(el.even.lo == doctest::Approx(0.0));
    CHECK(el.even.hi == doctest::Approx(0.25));
    CHECK(el.odd.lo == doctest::Approx(-0.25));
    CHECK(el.odd.hi == doctest::Approx(0.0));

    auto li = make_lens(0.3 * kPi, 1.0); // inward: parities swap
    auto ei = predict_essential_spectrum(*li, li->symmetries()[0]);
    CHECK(ei.even.lo == doctest::Approx(-0.2));
    CHECK(ei.even.hi == doctest::Approx(0.0));
    CHECK(ei.odd.lo == doctest::Approx(0.0));
    CHECK(ei.odd.hi == doctest::Approx(0.2));

    // Attached corner: outward tip on the line plus an inward mirror pair.
    auto h = make_corner_attached_ellipse(1.0, std::atanh(3.0 / 7.0), 0.25);
    auto eh = predict_essential_spectrum(*h, h->symmetries()[0]);
    double b2 = std::abs(0.5 - h->corners()[1].half_exterior_angle / kPi);
    CHECK(b2 == doctest::Approx(0.107652).epsilon(1e-4));
    CHECK(eh.even.lo == doctest::Approx(-b2));
    CHECK(eh.even.hi == doctest::Approx(0.25));
    CHECK(eh.odd.lo == doctest::Approx(-0.25));
    CHECK(eh.odd.hi == doctest::Approx(b2));
}

TEST_CASE("trigonometric interpolation") {
    int N = 32;
    Eigen::VectorXd samples(N);
    for (int j = 0; j < N; ++j)
        samples[j] = std::cos(2.0 * kPi * 3.0 * j / N) + 0.5 * std::sin(2.0 * kPi * j / N);
    for (int j = 0; j < N; ++j)
        CHECK(trig_interpolate(samples, double(j) / N) ==
              doctest::Approx(samples[j]).epsilon(1e-12));
    for (double t : {0.013, 0.41, 0.77}) {
        double exact = std::cos(2.0 * kPi * 3.0 * t) + 0.5 * std::sin(2.0 * kPi * t);
        CHECK(trig_interpolate(samples, t) == doctest::Approx(exact).epsilon(1e-11));
    }
}

TEST_CASE("exact eigenvector has vanishing quasimode residual") {
    auto s = ellipse_setup(128);
    auto r = solve_s_symmetric(s.mesh, s.Ks, s.gram, ParityBlock::Full,
                               &s.curve->symmetries()[0]);
    int k = int(r.values.size()) - 1;
    Eigen::VectorXd v = r.vectors.col(k);
    Eigen::VectorXd resid = s.Ks * v - r.values[k] * v;
    double eps = std::sqrt(std::abs(resid.dot(s.gram.G * resid))) /
                 std::sqrt(std::abs(v.dot(s.gram.G * v)));
    CHECK(eps < 1e-9);
}

TEST_CASE("lens has no embedded candidates") {
    auto l = make_lens(0.75 * kPi, 1.0);
    EmbeddedOptions eo;
    eo.depths = {6, 8, 10};
    auto r = embedded_scan(l, l->symmetries()[0], eo);
    CHECK(r.candidates.empty());
    CHECK(r.even_values.size() == 3);
}

TEST_CASE("localized mass fraction") {
    auto m = build_uniform_mesh(make_circle(1.0), 64);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(64);
    v[0] = 1.0;
    v[1] = 0.5;
    CHECK(localized_mass_fraction(m, v, 0.0, 0.1) == doctest::Approx(1.0));
    CHECK(localized_mass_fraction(m, v, 0.5, 0.1) == doctest::Approx(0.0));
}

TEST_CASE("cutoff quasimode on a perturbed ellipse") {
    auto base = make_ellipse(1.0, std::atanh(3.0 / 7.0));
    auto bm = build_uniform_mesh(base, 256);
    auto bKs = assemble_k_star(bm);
    auto bg = build_s_gram(bm, assemble_s(bm));
    auto full = solve_s_symmetric(bm, bKs, bg, ParityBlock::Full, &base->symmetries()[0]);
    int best = 0;
    double bd = 1e300;
    for (int k = 0; k < full.values.size(); ++k)
        if (std::abs(full.values[k] - 0.2) < bd) {
            bd = std::abs(full.values[k] - 0.2);
            best = k;
        }
    auto p0 = make_type_t_perturbation(base, base->position(0.0), 0.2, 0.8 * kPi, 0.25, 0.75,
                                       0.2 / 6.0);
    double t2 = std::min(2.0 * p0.t1, 0.25);
    auto pert = make_type_t_perturbation(base, base->position(0.0), 0.2, 0.8 * kPi, t2,
                                         1.0 - t2, 0.2 / 6.0);
    GradedOptions go;
    go.depth = 10;
    auto m = build_graded_mesh(pert.realized, go);
    auto Ks = assemble_k_star(m);
    auto g = build_s_gram(m, assemble_s(m));
    auto q = build_cutoff_quasimode(m, pert, full.vectors.col(best), 0.2, Ks, g);
    CHECK(std::abs(q.a) < 2.0);
    CHECK(q.epsilon < 0.1);
    CHECK(q.epsilon > 0.0);
    // psi vanishes off the retained arc and has zero weighted mean.
    double mean = 0.0;
    for (int i = 0; i < m.size(); ++i) {
        mean += m.w[i] * q.psi[i];
        if (!pert.on_shared_arc(m.t[i]))
            CHECK(q.psi[i] == 0.0);
    }
    CHECK(std::abs(mean) < 1e-12);
}
