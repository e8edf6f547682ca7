#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace sacfem {

using Point = std::array<double, 3>;
using Tet = std::array<int, 4>;

/// Conforming tetrahedral mesh of the unit cube.
///
/// Meshes are immutable once built. Refined meshes keep the coarse vertices
/// at the front of the vertex list and remember, per refinement, which two
/// vertices each new (edge-midpoint) vertex was created from. That history
/// is what makes prolongation between levels exact.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<Tet> tets;             // positively oriented
  std::vector<Tet> refinement_order; // same tets, vertex order used by red refinement
  std::vector<bool> boundary_mask;
  int level = 0;
  double h = 0.0;

  // Nesting metadata.
  std::uint64_t family = 0;
  std::vector<int> vertex_count_per_level;
  std::vector<std::shared_ptr<const std::vector<std::array<int, 2>>>> midpoint_parents;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int tet_count() const { return static_cast<int>(tets.size()); }
  double tet_volume(int t) const;
};

/// Kuhn triangulation of the unit cube: n^3 subcubes, six tetrahedra each.
Mesh build_box_mesh(int n);

/// Red refinement (eight children per tetrahedron, Bey's diagonal rule).
Mesh refine_red(const Mesh &mesh);

/// Builds build_box_mesh(base_n) followed by `refinements` red refinements.
std::vector<std::shared_ptr<const Mesh>> build_hierarchy(int base_n, int refinements);

double signed_volume(const Point &a, const Point &b, const Point &c, const Point &d);

/// max element diameter / min inradius
double quasi_uniformity_ratio(const Mesh &mesh);

struct ConformityReport {
  bool conforming = true;
  long interior_faces = 0;
  long boundary_faces = 0;
  long bad_faces = 0; // faces shared by >2 tets, or unmatched faces off the boundary
  long inverted_tets = 0;
};
ConformityReport check_conformity(const Mesh &mesh);

/// Vertex -> interior dof number (or -1 on the boundary). Interior vertices
/// are numbered in vertex order.
std::vector<int> interior_numbering(const Mesh &mesh);
int interior_count(const Mesh &mesh);

bool is_nested(const Mesh &coarse, const Mesh &fine);

/// Exact P1 prolongation of interior coefficients from `coarse` to `fine`.
/// Throws MeshError if `fine` was not obtained from `coarse` by refinement.
Eigen::VectorXd prolongate(const Mesh &coarse, const Mesh &fine, const Eigen::VectorXd &v);

/// Injection of fine interior coefficients onto the coarse interior nodes.
Eigen::VectorXd restrict_to_coarse(const Mesh &coarse, const Mesh &fine, const Eigen::VectorXd &v);

/// Sparse prolongation matrix (fine interior dofs x coarse interior dofs).
Eigen::SparseMatrix<double, Eigen::RowMajor> prolongation_matrix(const Mesh &coarse,
                                                                 const Mesh &fine);

/// Plain-text dump: "vertices N tets M", N lines "x y z b", M lines of indices.
void write_mesh_text(std::ostream &out, const Mesh &mesh);

} // namespace sacfem
