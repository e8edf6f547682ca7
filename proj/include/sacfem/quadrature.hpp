#pragma once

#include <array>
#include <vector>

namespace sacfem {

/// Symmetric quadrature rule on a tetrahedron, in barycentric coordinates.
/// Weights sum to one; multiply by the element volume.
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Smallest built-in rule that integrates polynomials of degree `order`
/// exactly. Orders above 5 are rejected.
const QuadratureRule &tet_rule(int order);

/// Exact integral of l0^a0 l1^a1 l2^a2 l3^a3 over a simplex of unit volume.
double barycentric_monomial_integral(const std::array<int, 4> &exponents);

} // namespace sacfem
