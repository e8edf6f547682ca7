#include "sacfem/error.hpp"
#include "sacfem/fem.hpp"
#include "sacfem/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace sacfem;

namespace {

double total_volume(const Mesh &m) {
  double v = 0.0;
  for (int t = 0; t < m.tet_count(); ++t)
    v += m.tet_volume(t);
  return v;
}

} // namespace

TEST_CASE("build_box_mesh: counts and size") {
  const Mesh m1 = build_box_mesh(1);
  CHECK(m1.vertex_count() == 8);
  CHECK(m1.tet_count() == 6);
  CHECK(m1.h == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

  const Mesh m2 = build_box_mesh(2);
  CHECK(m2.vertex_count() == 27);
  CHECK(m2.tet_count() == 48);
  // Oracle: lattice points with a coordinate in {0, 1}.
  int surface = 0;
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j)
      for (int k = 0; k <= 2; ++k)
        surface += (i % 2 == 0 || j % 2 == 0 || k % 2 == 0) ? 1 : 0;
  CHECK(surface == 26);
  CHECK(std::count(m2.boundary_mask.begin(), m2.boundary_mask.end(), true) == surface);
  CHECK(interior_count(m2) == 1);

  CHECK(std::abs(total_volume(build_box_mesh(4)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(build_box_mesh(0), ConfigError);
}

TEST_CASE("build_box_mesh: positive orientation, conformity, quasi-uniformity") {
  for (int n : {1, 2, 3, 4}) {
    const Mesh m = build_box_mesh(n);
    const ConformityReport r = check_conformity(m);
    CHECK(r.conforming);
    CHECK(r.boundary_faces == 12L * n * n);
    CHECK(m.h == doctest::Approx(std::sqrt(3.0) / n).epsilon(1e-14));
    CHECK(quasi_uniformity_ratio(m) < 20.0);
  }
}

TEST_CASE("refine_red: children, volume, nesting") {
  const Mesh m1 = build_box_mesh(1);
  const Mesh r1 = refine_red(m1);
  CHECK(r1.tet_count() == 48);
  CHECK(std::abs(total_volume(r1) - total_volume(m1)) < 1e-12);
  CHECK(r1.level == 1);
  for (int v = 0; v < m1.vertex_count(); ++v)
    CHECK(r1.vertices[v] == m1.vertices[v]);

  // refine(build(2)) and build(4) carry the same vertex set.
  std::vector<Point> a = refine_red(build_box_mesh(2)).vertices;
  std::vector<Point> b = build_box_mesh(4).vertices;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(a[i][c] - b[i][c]));
  CHECK(worst <= 1e-14);
}

TEST_CASE("refine_red: h halves, stays conforming and shape-regular") {
  auto levels = build_hierarchy(1, 4);
  const double q0 = quasi_uniformity_ratio(*levels[0]);
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const Mesh &m = *levels[l];
    CHECK(std::abs(m.h / levels[l - 1]->h - 0.5) < 1e-12);
    CHECK(check_conformity(m).conforming);
    const double q = quasi_uniformity_ratio(m);
    CHECK(q < 20.0);
    CHECK(q == doctest::Approx(q0).epsilon(1e-9));
    for (int v = 0; v < m.vertex_count(); ++v) {
      if (!m.boundary_mask[v])
        continue;
      const Point &p = m.vertices[v];
      const bool on = p[0] == 0 || p[0] == 1 || p[1] == 0 || p[1] == 1 || p[2] == 0 || p[2] == 1;
      CHECK(on);
    }
  }
}

TEST_CASE("prolongate: exact P1 transfer between nested levels") {
  auto levels = build_hierarchy(2, 2);
  const FemSpace coarse = FemSpace::assemble(levels[0]);
  const FemSpace mid = FemSpace::assemble(levels[1]);
  const FemSpace fine = FemSpace::assemble(levels[2]);

  SUBCASE("constant interior function") {
    const StateVector ones = StateVector::Ones(coarse.dof_count());
    const StateVector p = prolongate(*levels[0], *levels[1], ones);
    // Fine nodes that are coarse interior vertices keep the value 1.
    const std::vector<int> cidx = interior_numbering(*levels[0]);
    for (int v = 0; v < levels[0]->vertex_count(); ++v)
      if (cidx[v] >= 0)
        CHECK(p[mid.interior_index()[v]] == 1.0);
  }

  SUBCASE("norm preservation, midpoint rule, restriction") {
    StateVector v(mid.dof_count());
    for (int i = 0; i < v.size(); ++i)
      v[i] = std::sin(1.0 + i);
    const StateVector p = prolongate(*levels[1], *levels[2], v);
    CHECK(std::abs(l2_norm(mid, v) - l2_norm(fine, p)) < 1e-12);
    CHECK(std::abs(lq_norm(mid, v, 2.0) - lq_norm(fine, p, 2.0)) < 1e-12);

    const auto &par = *levels[2]->midpoint_parents[1];
    const int first = levels[2]->vertex_count_per_level[1];
    for (std::size_t j = 0; j < par.size(); ++j) {
      auto nodal = [&](const FemSpace &s, const StateVector &x, int vert) {
        const int d = s.interior_index()[vert];
        return d >= 0 ? x[d] : 0.0;
      };
      const double expected = 0.5 * (nodal(mid, v, par[j][0]) + nodal(mid, v, par[j][1]));
      CHECK(nodal(fine, p, first + static_cast<int>(j)) == doctest::Approx(expected).epsilon(1e-15));
    }
    const StateVector back = restrict_to_coarse(*levels[1], *levels[2], p);
    CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("two-level jump equals the matrix form") {
    StateVector v(coarse.dof_count());
    v[0] = 0.7;
    const StateVector direct = prolongate(*levels[0], *levels[2], v);
    const StateVector via = prolongate(*levels[1], *levels[2], prolongate(*levels[0], *levels[1], v));
    CHECK((direct - via).cwiseAbs().maxCoeff() < 1e-15);
    const auto P = prolongation_matrix(*levels[0], *levels[2]);
    CHECK((P * v - direct).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("non-nested pairs are rejected") {
    const Mesh other = build_box_mesh(4);
    StateVector v = StateVector::Zero(coarse.dof_count());
    CHECK_THROWS_AS(prolongate(*levels[0], other, v), MeshError);
    CHECK_THROWS_AS(prolongate(*levels[1], *levels[0], StateVector::Zero(mid.dof_count())), MeshError);
  }
}

TEST_CASE("mesh text dump") {
  std::ostringstream out;
  write_mesh_text(out, build_box_mesh(1));
  std::istringstream in(out.str());
  std::string w1, w2;
  int nv, nt;
  in >> w1 >> nv >> w2 >> nt;
  CHECK(w1 == "vertices");
  CHECK(w2 == "tets");
  CHECK(nv == 8);
  CHECK(nt == 6);
  double x, y, z;
  int b;
  in >> x >> y >> z >> b;
  CHECK(b == 1);
}
