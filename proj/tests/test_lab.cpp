#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nplab/lab.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nplab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}
} // namespace

TEST_CASE("scenario parsing validates strictly") {
    json good = json::parse(bundled_scenario_text("circle"));
    CHECK_NOTHROW(parse_scenario(good));

    json bad = good;
    bad["surprise"] = 1;
    CHECK_THROWS(parse_scenario(bad)); // unknown top-level key

    bad = good;
    bad["schema_version"] = 99;
    CHECK_THROWS(parse_scenario(bad));

    bad = good;
    bad["curve"]["flavor"] = "salty";
    CHECK_THROWS(run(parse_scenario(bad))); // unknown curve key

    bad = good;
    bad["analyses"].push_back("astrology");
    CHECK_THROWS(parse_scenario(bad));

    bad = good;
    bad["analyses"].push_back("parity");
    bad.erase("symmetry");
    CHECK_THROWS(parse_scenario(bad)); // parity requires a symmetry

    bad = good;
    bad["mesh"][0]["kind"] = "adaptive";
    CHECK_THROWS(parse_scenario(bad));
}

TEST_CASE("bundled corpus") {
    auto names = bundled_scenarios();
    CHECK(names.size() == 7);
    for (const auto& n : names) {
        auto sc = load_bundled_scenario(n);
        CHECK(sc.name == n);
    }
    CHECK_THROWS(load_bundled_scenario("does-not-exist"));
}

TEST_CASE("circle scenario run and artifacts") {
    auto dir = fs::temp_directory_path() / "nplab_lab_test";
    fs::remove_all(dir);
    auto rep = run(load_bundled_scenario("circle"), dir.string());
    CHECK(rep.all_passed);
    CHECK(rep.scenario_name == "circle");
    CHECK(rep.verdicts.size() == 2);
    CHECK(rep.config_hash.size() == 16);
    CHECK(rep.wall_seconds > 0.0);
    fs::path out = fs::path(rep.output_dir);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "spectrum.csv"));
    CHECK(fs::exists(out / "embedded.csv"));
    CHECK(fs::exists(out / "mesh.csv"));
    json doc = json::parse(slurp(out / "report.json"));
    CHECK(doc["all_passed"] == true);
    CHECK(doc["levels"].size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("determinism: identical artifacts and hash across runs") {
    auto d1 = fs::temp_directory_path() / "nplab_det_1";
    auto d2 = fs::temp_directory_path() / "nplab_det_2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    auto sc = load_bundled_scenario("circle");
    auto r1 = run(sc, d1.string());
    auto r2 = run(sc, d2.string());
    CHECK(r1.config_hash == r2.config_hash);
    CHECK(slurp(fs::path(r1.output_dir) / "spectrum.csv") ==
          slurp(fs::path(r2.output_dir) / "spectrum.csv"));
    CHECK(slurp(fs::path(r1.output_dir) / "mesh.csv") ==
          slurp(fs::path(r2.output_dir) / "mesh.csv"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("environment variable overrides the output directory") {
    auto dir = fs::temp_directory_path() / "nplab_env_out";
    fs::remove_all(dir);
    setenv("NP_LAB_OUTPUT_DIR", dir.string().c_str(), 1);
    auto rep = run(load_bundled_scenario("circle"));
    unsetenv("NP_LAB_OUTPUT_DIR");
    CHECK(fs::exists(fs::path(rep.output_dir) / "report.json"));
    CHECK(fs::path(rep.output_dir).string().find(dir.string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("ellipse scenario reproduces the alpha table") {
    auto rep = run(load_bundled_scenario("ellipse-3-7"));
    CHECK(rep.all_passed);
    REQUIRE(rep.document.contains("alpha_table"));
    CHECK(rep.document["alpha_table"].size() == 10); // +/- alpha_n, n=1..5
    for (const auto& row : rep.document["alpha_table"])
        CHECK(row["abs_error"].get<double>() < 1e-8);
}

TEST_CASE("scenario file loading") {
    auto path = fs::temp_directory_path() / "nplab_scenario.json";
    {
        std::ofstream f(path);
        f << bundled_scenario_text("circle");
    }
    auto sc = load_scenario_file(path.string());
    CHECK(sc.name == "circle");
    fs::remove(path);
    CHECK_THROWS(load_scenario_file(path.string()));
}

TEST_CASE("convergence studies") {
    // lambda_half on a circle ladder is 1/2 at every level.
    json doc = json::parse(R"({
      "schema_version": 1, "name": "conv-circle",
      "curve": {"kind": "circle", "radius": 1.5},
      "mesh": [{"kind": "uniform", "n": 16}, {"kind": "uniform", "n": 32},
               {"kind": "uniform", "n": 64}],
      "analyses": ["convergence"]
    })");
    auto table = convergence_study(parse_scenario(doc), "lambda_half");
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows)
        CHECK(std::abs(row.value - 0.5) < 1e-12);

    // alpha_1 error on the ellipse decays super-algebraically.
    auto e37 = load_bundled_scenario("ellipse-3-7");
    auto ta = convergence_study(e37, "alpha_1");
    REQUIRE(ta.rows.size() == 3);
    CHECK(ta.rows[0].value > 10.0 * ta.rows[1].value);
    CHECK(ta.rows[2].value < 1e-10);

    CHECK_THROWS(convergence_study(parse_scenario(doc), "alpha_1")); // circle has no alpha_1
    CHECK_THROWS(convergence_study(parse_scenario(doc), "nonsense"));
    json one_level = doc;
    one_level["mesh"] = json::array({json{{"kind", "uniform"}, {"n", 16}}});
    CHECK_THROWS(convergence_study(parse_scenario(one_level), "plemelj"));
}

TEST_CASE("quasimode scenario ladder passes") {
    auto rep = run(load_bundled_scenario("quasimode-ladder"));
    CHECK(rep.all_passed);
    REQUIRE(rep.document.contains("quasimode"));
    auto rungs = rep.document["quasimode"];
    REQUIRE(rungs.size() == 3);
    double prev = 1e300;
    for (const auto& r : rungs) {
        double eps = r["epsilon"].get<double>();
        CHECK(eps < prev * 1.05);
        prev = eps;
        CHECK(std::abs(r["a"].get<double>()) < 2.0);
    }
    CHECK(prev < 0.05);
    CHECK(rungs.back()["resolvent_bound"].get<double>() > 20.0);
}
