#pragma once

#include "nplab/curves.hpp"

#include <memory>
#include <string>
#include <vector>

namespace nplab {

enum class MeshKind { Uniform, Graded };

/// One quadrature panel of a graded mesh: global parameters [t0, t1], carrying
/// `order` Gauss-Legendre nodes starting at index `first` in the node arrays.
struct Panel {
    double t0 = 0.0, t1 = 0.0;
    int first = 0;
    int order = 0;
    int level = 0; // grading level; 0 = quasi-uniform middle panel
};

struct GradedOptions {
    int depth = 10;                 // geometric refinement levels per corner side
    int order = 16;                 // Gauss nodes per panel
    double sigma = 0.5;             // geometric grading ratio
    double corner_fraction = 1.0 / 3.0; // fraction of each region given to one graded block
};

/// Quadrature mesh on a closed curve: nodes t_i in [0,1), arclength weights
/// w_i (sum = curve length), and cached geometry at the nodes.
struct Mesh {
    std::shared_ptr<const Curve> curve;
    MeshKind kind = MeshKind::Uniform;

    std::vector<double> t, w;
    std::vector<Vec2> points, normals;
    std::vector<double> curvatures;
    std::vector<Panel> panels; // empty for uniform meshes

    GradedOptions graded_opts; // as-built options (graded meshes)

    int size() const { return static_cast<int>(t.size()); }
};

/// Uniform mesh t_i = i/N for smooth curves (throws if the curve has corners,
/// or N is odd).
Mesh build_uniform_mesh(std::shared_ptr<const Curve> curve, int N);

/// Panel mesh geometrically graded toward every corner.  Each inter-corner
/// region gets a graded block at both ends and quasi-uniform panels between;
/// corner tips are always panel endpoints.
Mesh build_graded_mesh(std::shared_ptr<const Curve> curve, const GradedOptions& opts);

/// Next refinement level: uniform N -> 2N; graded depth -> depth + 4.
Mesh refine(const Mesh& mesh);

/// Node involution induced by a mirror symmetry: out[i] = j such that
/// t_j = (sym.c - t_i) mod 1.  Built structurally (panel-to-panel), so it is
/// exact even for strongly graded meshes.  Throws if the mesh is not
/// symmetric under the involution.
std::vector<int> mirror_pairing(const Mesh& mesh, const ReflectionSymmetry& sym);

/// Node permutation induced by the parameter shift t -> t + 1/order of a
/// cyclic symmetry.  Throws if the node set is not invariant.
std::vector<int> rotation_permutation(const Mesh& mesh, const RotationSymmetry& rot);

/// Fixed points of the involution t -> (c - t) mod 1, i.e. c/2 and c/2 + 1/2.
std::pair<double, double> involution_fixed_points(const ReflectionSymmetry& sym);

void write_mesh_csv(const Mesh& mesh, const std::string& path);

} // namespace nplab
