#include "sacfem/quadrature.hpp"
#include "sacfem/error.hpp"

#include <algorithm>

namespace sacfem {

namespace {

void add_orbit_4(QuadratureRule &r, double a, double w) {
  const double b = 1.0 - 3.0 * a;
  for (int i = 0; i < 4; ++i) {
    std::array<double, 4> p{a, a, a, a};
    p[i] = b;
    r.points.push_back(p);
    r.weights.push_back(w);
  }
}

void add_orbit_6(QuadratureRule &r, double a, double w) {
  const double b = 0.5 - a;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      std::array<double, 4> p{a, a, a, a};
      p[i] = b;
      p[j] = b;
      r.points.push_back(p);
      r.weights.push_back(w);
    }
}

QuadratureRule make_centroid() {
  QuadratureRule r;
  r.degree = 1;
  r.points = {{0.25, 0.25, 0.25, 0.25}};
  r.weights = {1.0};
  return r;
}

QuadratureRule make_degree2() {
  QuadratureRule r;
  r.degree = 2;
  add_orbit_4(r, 0.1381966011250105151795413165634361882280, 0.25);
  return r;
}

// Stroud T3:3-1, one negative weight.
QuadratureRule make_degree3() {
  QuadratureRule r;
  r.degree = 3;
  r.points = {{0.25, 0.25, 0.25, 0.25}};
  r.weights = {-0.8};
  add_orbit_4(r, 1.0 / 6.0, 0.45);
  return r;
}

// 14-point rule, all weights positive.
QuadratureRule make_degree5() {
  QuadratureRule r;
  r.degree = 5;
  add_orbit_4(r, 0.31088591926330060980, 0.11268792571801585080);
  add_orbit_4(r, 0.092735250310891226402, 0.073493043116361949544);
  add_orbit_6(r, 0.045503704125649649492, 0.042546020777081466438);
  return r;
}

} // namespace

const QuadratureRule &tet_rule(int order) {
  static const QuadratureRule r1 = make_centroid();
  static const QuadratureRule r2 = make_degree2();
  static const QuadratureRule r3 = make_degree3();
  static const QuadratureRule r5 = make_degree5();
  if (order < 0 || order > 5)
    throw ConfigError("quadrature_order", "supported orders are 0..5");
  if (order <= 1)
    return r1;
  if (order == 2)
    return r2;
  if (order == 3)
    return r3;
  return r5;
}

double barycentric_monomial_integral(const std::array<int, 4> &e) {
  // |T| * 3! * prod(e_i!) / (sum e_i + 3)!
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i)
      f *= i;
    return f;
  };
  const int total = e[0] + e[1] + e[2] + e[3];
  return 6.0 * fact(e[0]) * fact(e[1]) * fact(e[2]) * fact(e[3]) / fact(total + 3);
}

} // namespace sacfem
