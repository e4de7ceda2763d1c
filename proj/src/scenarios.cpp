#include "nplab/lab.hpp"

#include <stdexcept>

namespace nplab {

namespace {

// rho0 = atanh(3/7) for the 3:7 confocal ellipse family.
constexpr const char* kRho0 = "0.45814536593707755";

const char* kCircle = R"JSON({
  "schema_version": 1,
  "name": "circle",
  "curve": {"kind": "circle", "radius": 1.5},
  "symmetry": "x-axis",
  "mesh": [{"kind": "uniform", "n": 64}],
  "analyses": ["spectrum"],
  "checks": [
    {"type": "half-eigenvalue", "tol": 1e-10},
    {"type": "max-abs-below", "tol": 1e-10}
  ]
})JSON";

std::string ellipse37() {
    return std::string(R"JSON({
  "schema_version": 1,
  "name": "ellipse-3-7",
  "curve": {"kind": "ellipse", "radius": 1.0, "rho0": )JSON") +
           kRho0 + R"JSON(},
  "symmetry": "minor-axis",
  "mesh": [
    {"kind": "uniform", "n": 64},
    {"kind": "uniform", "n": 128},
    {"kind": "uniform", "n": 256}
  ],
  "analyses": ["spectrum", "parity", "plemelj"],
  "checks": [
    {"type": "alpha-table", "count": 5, "tol": 1e-8},
    {"type": "plemelj-below", "tol": 1e-8}
  ]
})JSON";
}

const char* kLensOutward = R"JSON({
  "schema_version": 1,
  "name": "lens-outward",
  "curve": {"kind": "lens", "theta_pi": 0.75, "chord": 1.0},
  "symmetry": "chord",
  "mesh": [
    {"kind": "graded", "depth": 10},
    {"kind": "graded", "depth": 20},
    {"kind": "graded", "depth": 30}
  ],
  "analyses": ["parity", "essential_prediction", "plemelj"],
  "checks": [
    {"type": "plemelj-below", "tol": 1e-3, "level": 1},
    {"type": "plemelj-monotone"},
    {"type": "filling", "resolution": 0.01, "extreme_rel_tol": 0.05,
     "wrong_sign_margin": 0.02, "stability_tol": 1e-3}
  ]
})JSON";

const char* kLensInward = R"JSON({
  "schema_version": 1,
  "name": "lens-inward",
  "curve": {"kind": "lens", "theta_pi": 0.3, "chord": 1.0},
  "symmetry": "chord",
  "mesh": [
    {"kind": "graded", "depth": 10},
    {"kind": "graded", "depth": 16},
    {"kind": "graded", "depth": 22}
  ],
  "analyses": ["parity", "essential_prediction", "plemelj"],
  "checks": [
    {"type": "plemelj-monotone"},
    {"type": "filling", "resolution": 0.01, "extreme_rel_tol": 0.05,
     "wrong_sign_margin": 0.02, "stability_tol": 1e-3}
  ]
})JSON";

std::string hkl() {
    return std::string(R"JSON({
  "schema_version": 1,
  "name": "hkl-perturbed-ellipse",
  "curve": {"kind": "corner-attached-ellipse", "radius": 1.0,
            "rho0": )JSON") +
           kRho0 + R"JSON(, "omega_halfwidth": 0.25},
  "symmetry": "minor-axis",
  "mesh": [{"kind": "graded", "depth": 12}],
  "analyses": ["essential_prediction", "embedded"],
  "embedded": {"depths": [12, 16, 20], "stability_tol": 1e-3, "margin": 0.02},
  "checks": [
    {"type": "embedded-count", "parity": "o", "lo": 0.18, "hi": 0.22, "count": 1},
    {"type": "embedded-count", "parity": "e", "lo": -0.22, "hi": -0.18, "count": 1},
    {"type": "embedded-count", "parity": "any", "lo": 0.06, "hi": 0.10, "count": 0},
    {"type": "embedded-count", "parity": "any", "lo": -0.10, "hi": -0.06, "count": 0}
  ]
})JSON";
}

std::string quasimodeLadder() {
    return std::string(R"JSON({
  "schema_version": 1,
  "name": "quasimode-ladder",
  "curve": {"kind": "ellipse", "radius": 1.0, "rho0": )JSON") +
           kRho0 + R"JSON(},
  "symmetry": "minor-axis",
  "mesh": [{"kind": "uniform", "n": 256}],
  "analyses": ["quasimode"],
  "quasimode": {"lambda": 0.2, "theta_pi": 0.8, "deltas": [0.4, 0.2, 0.1],
                "delta_prime_ratio": 0.16666666666666666, "base_n": 256,
                "depth": 12},
  "checks": [
    {"type": "quasimode-ladder", "step_slack": 0.05, "final_below": 0.05}
  ]
})JSON";
}

std::string theoremA() {
    return std::string(R"JSON({
  "schema_version": 1,
  "name": "theorem-a",
  "curve": {"kind": "theorem-a", "radius": 1.0, "rho0": )JSON") +
           kRho0 + R"JSON(, "j_max": 1, "inward": false,
            "deltas": [0.4, 0.2, 0.1, 0.05], "location_tol": 0.02},
  "symmetry": "minor-axis",
  "mesh": [],
  "analyses": ["theorem_a"],
  "embedded": {"depths": [10, 14, 18], "stability_tol": 1e-3, "margin": 0.02},
  "checks": []
})JSON";
}

} // namespace

std::vector<std::string> bundled_scenarios() {
    return {"circle",   "ellipse-3-7",           "lens-outward",     "lens-inward",
            "hkl-perturbed-ellipse", "quasimode-ladder", "theorem-a"};
}

std::string bundled_scenario_text(const std::string& name) {
    if (name == "circle")
        return kCircle;
    if (name == "ellipse-3-7")
        return ellipse37();
    if (name == "lens-outward")
        return kLensOutward;
    if (name == "lens-inward")
        return kLensInward;
    if (name == "hkl-perturbed-ellipse")
        return hkl();
    if (name == "quasimode-ladder")
        return quasimodeLadder();
    if (name == "theorem-a")
        return theoremA();
    throw std::invalid_argument("unknown bundled scenario: " + name);
}

Scenario load_bundled_scenario(const std::string& name) {
    return parse_scenario(nlohmann::json::parse(bundled_scenario_text(name)));
}

} // namespace nplab
