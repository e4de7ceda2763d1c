#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nplab/curves.hpp"
#include "nplab/mesh.hpp"

#include <cmath>
#include <filesystem>

using namespace nplab;
namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("uniform mesh basics") {
    auto c = make_circle(2.0);
    auto m = build_uniform_mesh(c, 64);
    CHECK(m.size() == 64);
    CHECK(m.kind == MeshKind::Uniform);
    double wsum = 0.0;
    for (double w : m.w)
        wsum += w;
    CHECK(wsum == doctest::Approx(c->total_length()).epsilon(1e-13));
    CHECK(m.t[5] == doctest::Approx(5.0 / 64).epsilon(1e-15));
    CHECK(m.points[0].norm() == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS(build_uniform_mesh(c, 63)); // odd
    CHECK_THROWS(build_uniform_mesh(c, 2));  // too small
    CHECK_THROWS(build_uniform_mesh(make_lens(0.75 * kPi, 1.0), 64)); // corners
}

TEST_CASE("graded mesh on the lens") {
    auto l = make_lens(0.75 * kPi, 1.0);
    GradedOptions go;
    go.depth = 8;
    auto m = build_graded_mesh(l, go);
    CHECK(m.kind == MeshKind::Graded);
    CHECK(m.size() == int(m.panels.size()) * go.order);
    double wsum = 0.0;
    for (double w : m.w)
        wsum += w;
    CHECK(wsum == doctest::Approx(l->total_length()).epsilon(1e-12));
    // Innermost panels touch the corners.
    int touching = 0;
    for (const auto& p : m.panels)
        for (const auto& c : l->corners())
            if (std::abs(p.t0 - c.t) < 1e-15 || std::abs(p.t1 - c.t) < 1e-15 ||
                std::abs(p.t1 - 1.0 - c.t) < 1e-15)
                ++touching;
    CHECK(touching == 4); // one panel on each side of each corner
    // Level tags peak at the configured depth.
    int max_level = 0;
    for (const auto& p : m.panels)
        max_level = std::max(max_level, p.level);
    CHECK(max_level == go.depth);

    CHECK_THROWS(build_graded_mesh(make_circle(1.0), go)); // smooth curve
}

TEST_CASE("refinement") {
    auto c = make_circle(1.0);
    auto m = build_uniform_mesh(c, 64);
    CHECK(refine(m).size() == 128);

    auto l = make_lens(0.75 * kPi, 1.0);
    GradedOptions go;
    go.depth = 6;
    auto g = build_graded_mesh(l, go);
    auto g2 = refine(g);
    CHECK(g2.graded_opts.depth == 10);
    CHECK(g2.size() > g.size());
}

TEST_CASE("mirror pairing, uniform") {
    auto e = make_ellipse(1.0, std::atanh(3.0 / 7.0));
    auto m = build_uniform_mesh(e, 64);
    for (const auto& sym : e->symmetries()) {
        auto pair = mirror_pairing(m, sym);
        for (int i = 0; i < m.size(); ++i) {
            CHECK(pair[pair[i]] == i);
            CHECK((sym.mirror(m.points[i]) - m.points[pair[i]]).norm() ==
                  doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("mirror pairing, graded") {
    auto l = make_lens(0.75 * kPi, 1.0);
    GradedOptions go;
    go.depth = 10;
    auto m = build_graded_mesh(l, go);
    for (const auto& sym : l->symmetries()) {
        auto pair = mirror_pairing(m, sym);
        for (int i = 0; i < m.size(); ++i) {
            CHECK(pair[pair[i]] == i);
            CHECK((sym.mirror(m.points[i]) - m.points[pair[i]]).norm() ==
                  doctest::Approx(0.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("rotation permutation") {
    auto e = make_ellipse(1.0, std::atanh(3.0 / 7.0));
    auto m = build_uniform_mesh(e, 64);
    REQUIRE(e->rotations().size() == 1);
    auto perm = rotation_permutation(m, e->rotations()[0]);
    for (int i = 0; i < m.size(); ++i) {
        CHECK((m.points[perm[i]] + m.points[i]).norm() ==
              doctest::Approx(0.0).epsilon(1e-10)); // order-2 rotation about 0
        CHECK(perm[perm[i]] == i);
    }
}

TEST_CASE("involution fixed points") {
    ReflectionSymmetry s;
    s.c = 0.5;
    auto [f1, f2] = involution_fixed_points(s);
    CHECK(f1 == doctest::Approx(0.25));
    CHECK(f2 == doctest::Approx(0.75));
}

TEST_CASE("mesh csv export") {
    auto m = build_uniform_mesh(make_circle(1.0), 16);
    auto path = std::filesystem::temp_directory_path() / "nplab_test_mesh.csv";
    write_mesh_csv(m, path.string());
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
}
