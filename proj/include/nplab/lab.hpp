#pragma once

#include "nplab/curves.hpp"
#include "nplab/mesh.hpp"
#include "nplab/operators.hpp"
#include "nplab/spectral.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nplab {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// One rung of the mesh ladder.
struct MeshSpec {
    std::string kind = "uniform"; // "uniform" | "graded"
    int n = 64;                   // uniform node count
    int depth = 10;               // graded depth
    int order = 16;
    double sigma = 0.5;
};

/// Declarative experiment description, parsed from a versioned JSON config.
/// Unknown keys anywhere in the document are hard errors.
struct Scenario {
    int schema_version = kSchemaVersion;
    std::string name;
    nlohmann::json curve;                // kind + parameters
    std::string symmetry;                // reflection symmetry name ("" = none)
    std::vector<MeshSpec> mesh;          // refinement ladder
    std::vector<std::string> analyses;   // subset of the supported analyses
    nlohmann::json embedded;             // options for the embedded scan
    nlohmann::json quasimode;            // options for the quasimode ladder
    std::vector<nlohmann::json> checks;  // verdict definitions
    std::string output_dir;              // default artifact directory ("" = none)
    nlohmann::json raw;                  // canonical echo (hashing, report)
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

/// Bundled scenario corpus (embedded in the library).
std::vector<std::string> bundled_scenarios();
std::string bundled_scenario_text(const std::string& name);
Scenario load_bundled_scenario(const std::string& name);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct RunReport {
    std::string scenario_name;
    std::string version;
    std::string config_hash;
    double wall_seconds = 0.0;
    bool all_passed = false;
    std::vector<Verdict> verdicts;
    nlohmann::json document;  // scenario echo + per-level results
    std::string output_dir;   // where artifacts were written ("" if disabled)
};

/// Runs a scenario: executes the mesh ladder, assembles operators, performs
/// the requested analyses, evaluates the configured checks, and writes
/// report.json / spectrum.csv / embedded.csv / mesh.csv artifacts.
/// Output directory priority: `output_override` argument, then the
/// NP_LAB_OUTPUT_DIR environment variable, then the scenario's own setting;
/// empty means no artifacts.
RunReport run(const Scenario& sc, const std::string& output_override = "");

struct ConvergenceRow {
    std::string level;
    double value = 0.0;
    double diff = 0.0;  // |v_k - v_{k+1}|, 0 for the last row
    double rate = 0.0;  // ratio of successive diffs, 0 where undefined
};
struct ConvergenceTable {
    std::string observable;
    std::vector<ConvergenceRow> rows;
};

/// Tracks a named observable across the scenario's mesh ladder (>= 3 levels).
/// Observables: "plemelj", "lambda_half", "alpha_1" (ellipse only),
/// "lambda_max".
ConvergenceTable convergence_study(const Scenario& sc, const std::string& observable);

/// End-to-end embedded-eigenvalue construction: picks b so that the base
/// ellipse eigenvalues up to order j_max lie strictly inside (-b, b), sets
/// theta = pi*(1/2 + b) (outward) or pi*(1/2 - b) (inward), and walks a
/// delta-halving ladder of type-T perturbations until the detector confirms
/// j_max positive and j_max negative refinement-stable candidates near the
/// unperturbed values, or delta underflows (reported as a failure, not a
/// crash).  The achieved quasimode residual per target is reported.
RunReport scenario_theorem_a(double radius, double rho0, int j_max, bool inward = false,
                             const std::string& output_override = "");

} // namespace nplab
