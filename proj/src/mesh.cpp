#include "sacfem/mesh.hpp"
#include "sacfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

namespace sacfem {

namespace {

double distance(const Point &a, const Point &b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double triangle_area(const Point &a, const Point &b, const Point &c) {
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

bool on_cube_boundary(const Point &p) {
  for (double c : p)
    if (c == 0.0 || c == 1.0)
      return true;
  return false;
}

Tet oriented(const Mesh &m, Tet t) {
  if (signed_volume(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]) < 0)
    std::swap(t[2], t[3]);
  return t;
}

double max_edge(const Mesh &m, const Tet &t) {
  double h = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      h = std::max(h, distance(m.vertices[t[a]], m.vertices[t[b]]));
  return h;
}

void finalize(Mesh &m) {
  m.boundary_mask.resize(m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    m.boundary_mask[v] = on_cube_boundary(m.vertices[v]);
  m.tets.resize(m.refinement_order.size());
  double h = 0.0;
  for (std::size_t t = 0; t < m.refinement_order.size(); ++t) {
    m.tets[t] = oriented(m, m.refinement_order[t]);
    h = std::max(h, max_edge(m, m.tets[t]));
  }
  m.h = h;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b)
    std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace

double signed_volume(const Point &a, const Point &b, const Point &c, const Point &d) {
  const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  const double det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                     u[2] * (v[0] * w[1] - v[1] * w[0]);
  return det / 6.0;
}

double Mesh::tet_volume(int t) const {
  const Tet &k = tets[t];
  return signed_volume(vertices[k[0]], vertices[k[1]], vertices[k[2]], vertices[k[3]]);
}

Mesh build_box_mesh(int n) {
  if (n < 1)
    throw ConfigError("n", "subdivisions per axis must be >= 1");
  Mesh m;
  const int np = n + 1;
  m.vertices.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i)
        m.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n,
                              static_cast<double>(k) / n});
  auto id = [np](int i, int j, int k) { return i + np * (j + np * k); };

  // Kuhn simplices: walk from the low corner to the high corner along one
  // axis permutation. This ordering is the one red refinement expects.
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  m.refinement_order.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto &p : perms) {
          int c[3] = {i, j, k};
          Tet t;
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          m.refinement_order.push_back(t);
        }
  m.level = 0;
  m.family = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(n);
  m.vertex_count_per_level = {m.vertex_count()};
  finalize(m);
  return m;
}

Mesh refine_red(const Mesh &mesh) {
  Mesh fine;
  fine.vertices = mesh.vertices;
  auto parents = std::make_shared<std::vector<std::array<int, 2>>>();
  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.refinement_order.size() * 2);

  auto mid = [&](int a, int b) {
    const auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), fine.vertex_count());
    if (inserted) {
      const Point &pa = mesh.vertices[a];
      const Point &pb = mesh.vertices[b];
      fine.vertices.push_back(
          {0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])});
      parents->push_back({a, b});
    }
    return it->second;
  };

  fine.refinement_order.reserve(mesh.refinement_order.size() * 8);
  for (const Tet &t : mesh.refinement_order) {
    const int x0 = t[0], x1 = t[1], x2 = t[2], x3 = t[3];
    const int x01 = mid(x0, x1), x02 = mid(x0, x2), x03 = mid(x0, x3);
    const int x12 = mid(x1, x2), x13 = mid(x1, x3), x23 = mid(x2, x3);
    // Corner children, then the inner octahedron cut along x02-x13.
    fine.refinement_order.push_back({x0, x01, x02, x03});
    fine.refinement_order.push_back({x01, x1, x12, x13});
    fine.refinement_order.push_back({x02, x12, x2, x23});
    fine.refinement_order.push_back({x03, x13, x23, x3});
    fine.refinement_order.push_back({x01, x02, x03, x13});
    fine.refinement_order.push_back({x01, x02, x12, x13});
    fine.refinement_order.push_back({x02, x03, x13, x23});
    fine.refinement_order.push_back({x02, x12, x13, x23});
  }
  fine.level = mesh.level + 1;
  fine.family = mesh.family;
  fine.vertex_count_per_level = mesh.vertex_count_per_level;
  fine.vertex_count_per_level.push_back(fine.vertex_count());
  fine.midpoint_parents = mesh.midpoint_parents;
  fine.midpoint_parents.push_back(std::move(parents));
  finalize(fine);
  return fine;
}

std::vector<std::shared_ptr<const Mesh>> build_hierarchy(int base_n, int refinements) {
  std::vector<std::shared_ptr<const Mesh>> out;
  out.push_back(std::make_shared<const Mesh>(build_box_mesh(base_n)));
  for (int r = 0; r < refinements; ++r)
    out.push_back(std::make_shared<const Mesh>(refine_red(*out.back())));
  return out;
}

double quasi_uniformity_ratio(const Mesh &mesh) {
  double max_diam = 0.0;
  double min_inradius = std::numeric_limits<double>::infinity();
  for (const Tet &t : mesh.tets) {
    const auto &p = mesh.vertices;
    max_diam = std::max(max_diam, max_edge(mesh, t));
    const double area = triangle_area(p[t[1]], p[t[2]], p[t[3]]) +
                        triangle_area(p[t[0]], p[t[2]], p[t[3]]) +
                        triangle_area(p[t[0]], p[t[1]], p[t[3]]) +
                        triangle_area(p[t[0]], p[t[1]], p[t[2]]);
    const double vol = std::abs(signed_volume(p[t[0]], p[t[1]], p[t[2]], p[t[3]]));
    min_inradius = std::min(min_inradius, 3.0 * vol / area);
  }
  return max_diam / min_inradius;
}

ConformityReport check_conformity(const Mesh &mesh) {
  ConformityReport r;
  std::map<std::array<int, 3>, int> faces;
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const Tet &k = mesh.tets[t];
    if (mesh.tet_volume(t) <= 0)
      ++r.inverted_tets;
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f;
      int c = 0;
      for (int a = 0; a < 4; ++a)
        if (a != skip)
          f[c++] = k[a];
      std::sort(f.begin(), f.end());
      ++faces[f];
    }
  }
  for (const auto &[f, count] : faces) {
    if (count == 2) {
      ++r.interior_faces;
    } else if (count == 1) {
      // An unmatched face must lie in one of the cube's boundary planes.
      bool on_plane = false;
      for (int axis = 0; axis < 3 && !on_plane; ++axis)
        for (double plane : {0.0, 1.0}) {
          bool all = true;
          for (int v : f)
            all = all && mesh.vertices[v][axis] == plane;
          on_plane = on_plane || all;
        }
      if (on_plane)
        ++r.boundary_faces;
      else
        ++r.bad_faces;
    } else {
      ++r.bad_faces;
    }
  }
  r.conforming = r.bad_faces == 0 && r.inverted_tets == 0;
  return r;
}

std::vector<int> interior_numbering(const Mesh &mesh) {
  std::vector<int> index(mesh.vertices.size(), -1);
  int next = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (!mesh.boundary_mask[v])
      index[v] = next++;
  return index;
}

int interior_count(const Mesh &mesh) {
  return static_cast<int>(std::count(mesh.boundary_mask.begin(), mesh.boundary_mask.end(), false));
}

bool is_nested(const Mesh &coarse, const Mesh &fine) {
  return coarse.family == fine.family && coarse.level < fine.level &&
         static_cast<int>(fine.vertex_count_per_level.size()) > coarse.level &&
         fine.vertex_count_per_level[coarse.level] == coarse.vertex_count() &&
         static_cast<int>(fine.midpoint_parents.size()) == fine.level;
}

namespace {

void require_nested(const Mesh &coarse, const Mesh &fine) {
  if (!is_nested(coarse, fine))
    throw MeshError("prolongation requires a fine mesh refined from the coarse mesh "
                    "(family/level mismatch: coarse level " +
                    std::to_string(coarse.level) + ", fine level " + std::to_string(fine.level) +
                    ")");
}

} // namespace

Eigen::VectorXd prolongate(const Mesh &coarse, const Mesh &fine, const Eigen::VectorXd &v) {
  require_nested(coarse, fine);
  const std::vector<int> cidx = interior_numbering(coarse);
  if (v.size() != interior_count(coarse))
    throw MeshError("prolongate: coefficient vector does not match the coarse mesh");
  std::vector<double> nodal(fine.vertices.size(), 0.0);
  for (int i = 0; i < coarse.vertex_count(); ++i)
    if (cidx[i] >= 0)
      nodal[i] = v[cidx[i]];
  for (int l = coarse.level; l < fine.level; ++l) {
    const auto &par = *fine.midpoint_parents[l];
    const int first = fine.vertex_count_per_level[l];
    for (std::size_t j = 0; j < par.size(); ++j)
      nodal[first + j] = 0.5 * (nodal[par[j][0]] + nodal[par[j][1]]);
  }
  const std::vector<int> fidx = interior_numbering(fine);
  Eigen::VectorXd out(interior_count(fine));
  for (int i = 0; i < fine.vertex_count(); ++i)
    if (fidx[i] >= 0)
      out[fidx[i]] = nodal[i];
  return out;
}

Eigen::VectorXd restrict_to_coarse(const Mesh &coarse, const Mesh &fine, const Eigen::VectorXd &v) {
  require_nested(coarse, fine);
  const std::vector<int> cidx = interior_numbering(coarse);
  const std::vector<int> fidx = interior_numbering(fine);
  Eigen::VectorXd out(interior_count(coarse));
  for (int i = 0; i < coarse.vertex_count(); ++i)
    if (cidx[i] >= 0)
      out[cidx[i]] = v[fidx[i]];
  return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> prolongation_matrix(const Mesh &coarse,
                                                                 const Mesh &fine) {
  require_nested(coarse, fine);
  // Each fine vertex as a short weighted combination of coarse vertices.
  using Row = std::vector<std::pair<int, double>>;
  std::vector<Row> rows(fine.vertices.size());
  for (int i = 0; i < coarse.vertex_count(); ++i)
    rows[i] = {{i, 1.0}};
  for (int l = coarse.level; l < fine.level; ++l) {
    const auto &par = *fine.midpoint_parents[l];
    const int first = fine.vertex_count_per_level[l];
    for (std::size_t j = 0; j < par.size(); ++j) {
      std::map<int, double> acc;
      for (int side = 0; side < 2; ++side)
        for (const auto &[c, w] : rows[par[j][side]])
          acc[c] += 0.5 * w;
      rows[first + j].assign(acc.begin(), acc.end());
    }
  }
  const std::vector<int> cidx = interior_numbering(coarse);
  const std::vector<int> fidx = interior_numbering(fine);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < fine.vertex_count(); ++i) {
    if (fidx[i] < 0)
      continue;
    for (const auto &[c, w] : rows[i])
      if (cidx[c] >= 0)
        trip.emplace_back(fidx[i], cidx[c], w);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> P(interior_count(fine), interior_count(coarse));
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

void write_mesh_text(std::ostream &out, const Mesh &mesh) {
  out.precision(17);
  out << "vertices " << mesh.vertex_count() << " tets " << mesh.tet_count() << '\n';
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point &p = mesh.vertices[v];
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << (mesh.boundary_mask[v] ? 1 : 0) << '\n';
  }
  for (const Tet &t : mesh.tets)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

} // namespace sacfem
