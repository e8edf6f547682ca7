#include "sacfem/fem.hpp"
#include "sacfem/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace sacfem {

using std::numbers::pi;

AnalyticFunction sine_product(double amplitude) {
  AnalyticFunction f;
  f.value = [amplitude](const Point &x) {
    return amplitude * std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]);
  };
  f.gradient = [amplitude](const Point &x) {
    const double s0 = std::sin(pi * x[0]), s1 = std::sin(pi * x[1]), s2 = std::sin(pi * x[2]);
    const double c0 = std::cos(pi * x[0]), c1 = std::cos(pi * x[1]), c2 = std::cos(pi * x[2]);
    return Vec3{amplitude * pi * c0 * s1 * s2, amplitude * pi * s0 * c1 * s2,
                amplitude * pi * s0 * s1 * c2};
  };
  f.laplacian = [amplitude](const Point &x) {
    return -3.0 * pi * pi * amplitude * std::sin(pi * x[0]) * std::sin(pi * x[1]) *
           std::sin(pi * x[2]);
  };
  return f;
}

namespace {

/// Barycentric gradients (rows) and volume of a tetrahedron.
double barycentric_gradients(const Point &a, const Point &b, const Point &c, const Point &d,
                             Eigen::Matrix<double, 4, 3> &grads) {
  Eigen::Matrix3d J;
  J << b[0] - a[0], c[0] - a[0], d[0] - a[0], //
      b[1] - a[1], c[1] - a[1], d[1] - a[1],  //
      b[2] - a[2], c[2] - a[2], d[2] - a[2];
  const double det = J.determinant();
  if (!(std::abs(det) > 0.0))
    return 0.0;
  const Eigen::Matrix3d Jinv = J.inverse();
  grads.row(1) = Jinv.row(0);
  grads.row(2) = Jinv.row(1);
  grads.row(3) = Jinv.row(2);
  grads.row(0) = -(grads.row(1) + grads.row(2) + grads.row(3));
  return det / 6.0;
}

int default_iterations(const SolveOptions &opt, Eigen::Index n) {
  if (opt.max_iterations > 0)
    return opt.max_iterations;
  return static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)))));
}

} // namespace

ElementMatrices element_matrices(const Point &a, const Point &b, const Point &c, const Point &d) {
  ElementMatrices e;
  Eigen::Matrix<double, 4, 3> g;
  e.volume = barycentric_gradients(a, b, c, d, g);
  const double v = std::abs(e.volume);
  e.stiffness = v * (g * g.transpose());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      e.mass(i, j) = v * (i == j ? 0.1 : 0.05);
  return e;
}

FemSpace FemSpace::assemble(std::shared_ptr<const Mesh> mesh, int quadrature_order) {
  FemSpace s;
  (void)tet_rule(quadrature_order); // validates the order
  s.mesh_ = std::move(mesh);
  s.quadrature_order_ = quadrature_order;
  const Mesh &m = *s.mesh_;
  s.interior_index_ = interior_numbering(m);
  s.dof_count_ = interior_count(m);
  s.dof_vertex_.resize(s.dof_count_);
  for (int v = 0; v < m.vertex_count(); ++v)
    if (s.interior_index_[v] >= 0)
      s.dof_vertex_[s.interior_index_[v]] = v;

  s.tet_dofs_.resize(m.tet_count());
  s.volumes_.resize(m.tet_count());
  std::vector<Eigen::Triplet<double>> mt, at;
  mt.reserve(static_cast<std::size_t>(m.tet_count()) * 16);
  at.reserve(static_cast<std::size_t>(m.tet_count()) * 16);
  for (int t = 0; t < m.tet_count(); ++t) {
    const Tet &k = m.tets[t];
    const ElementMatrices e =
        element_matrices(m.vertices[k[0]], m.vertices[k[1]], m.vertices[k[2]], m.vertices[k[3]]);
    if (!(e.volume > 0.0))
      throw MeshError("assembly failed: degenerate or inverted tetrahedron " + std::to_string(t),
                      t);
    s.volumes_[t] = e.volume;
    for (int a = 0; a < 4; ++a)
      s.tet_dofs_[t][a] = s.interior_index_[k[a]];
    for (int a = 0; a < 4; ++a) {
      const int i = s.tet_dofs_[t][a];
      if (i < 0)
        continue;
      for (int b = 0; b < 4; ++b) {
        const int j = s.tet_dofs_[t][b];
        if (j < 0)
          continue;
        mt.emplace_back(i, j, e.mass(a, b));
        at.emplace_back(i, j, e.stiffness(a, b));
      }
    }
  }
  s.mass_.resize(s.dof_count_, s.dof_count_);
  s.mass_.setFromTriplets(mt.begin(), mt.end());
  s.stiffness_.resize(s.dof_count_, s.dof_count_);
  s.stiffness_.setFromTriplets(at.begin(), at.end());
  return s;
}

Point FemSpace::quadrature_point(int tet, int q) const {
  const Tet &k = mesh_->tets[tet];
  const auto &l = rule().points[q];
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 3; ++c)
      x[c] += l[a] * mesh_->vertices[k[a]][c];
  return x;
}

Eigen::VectorXd solve_spd(const SparseMatrix &A, const Eigen::VectorXd &b, const SolveOptions &opt,
                          const std::string &what, const Eigen::VectorXd *guess) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(opt.rtol);
  cg.setMaxIterations(default_iterations(opt, A.rows()));
  cg.compute(A);
  Eigen::VectorXd x;
  if (guess)
    x = cg.solveWithGuess(b, *guess);
  else
    x = cg.solve(b);
  if (cg.info() != Eigen::Success || !x.allFinite())
    throw SolverError(what, cg.error(), static_cast<int>(cg.iterations()));
  return x;
}

SpdSolver::SpdSolver(SparseMatrix matrix, SolveOptions opt, std::string what)
    : matrix_(std::move(matrix)), opt_(opt), what_(std::move(what)) {
  cg_.setTolerance(opt_.rtol);
  cg_.setMaxIterations(default_iterations(opt_, matrix_.rows()));
  cg_.compute(matrix_);
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd &b, const Eigen::VectorXd &guess) {
  Eigen::VectorXd x = cg_.solveWithGuess(b, guess);
  last_iterations_ = static_cast<int>(cg_.iterations());
  if (cg_.info() != Eigen::Success || !x.allFinite())
    throw SolverError(what_, cg_.error(), last_iterations_);
  return x;
}

StateVector interpolate(const FemSpace &space, const ScalarField &f) {
  StateVector v(space.dof_count());
  for (int i = 0; i < space.dof_count(); ++i)
    v[i] = f(space.mesh().vertices[space.dof_vertex()[i]]);
  return v;
}

Eigen::VectorXd load_vector(const FemSpace &space, const ScalarField &f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  const QuadratureRule &rule = space.rule();
  for (int t = 0; t < space.mesh().tet_count(); ++t) {
    const auto &dofs = space.tet_dofs()[t];
    if (dofs[0] < 0 && dofs[1] < 0 && dofs[2] < 0 && dofs[3] < 0)
      continue;
    const double vol = space.volumes()[t];
    for (int q = 0; q < rule.size(); ++q) {
      const double fq = f(space.quadrature_point(t, q)) * rule.weights[q] * vol;
      for (int a = 0; a < 4; ++a)
        if (dofs[a] >= 0)
          b[dofs[a]] += fq * rule.points[q][a];
    }
  }
  return b;
}

StateVector l2_project(const FemSpace &space, const ScalarField &f, const SolveOptions &opt) {
  return solve_spd(space.mass(), load_vector(space, f), opt, "l2_project");
}

StateVector l2_project(const FemSpace &coarse, const FemSpace &fine, const StateVector &v_fine,
                       const SolveOptions &opt) {
  const SparseMatrix P = prolongation_matrix(coarse.mesh(), fine.mesh());
  const Eigen::VectorXd b = P.transpose() * (fine.mass() * v_fine);
  return solve_spd(coarse.mass(), b, opt, "l2_project (nested)");
}

StateVector apply_discrete_laplacian(const FemSpace &space, const StateVector &v,
                                     const SolveOptions &opt) {
  const Eigen::VectorXd rhs = -(space.stiffness() * v);
  return solve_spd(space.mass(), rhs, opt, "apply_discrete_laplacian");
}

StateVector ritz_project(const FemSpace &space, const AnalyticFunction &f, const SolveOptions &opt) {
  const Eigen::VectorXd b = load_vector(space, f.laplacian);
  return solve_spd(space.stiffness(), -b, opt, "ritz_project");
}

StateVector ritz_project_weak(const FemSpace &space, const std::function<Vec3(const Point &)> &grad_f,
                              const SolveOptions &opt) {
  const QuadratureRule &rule = space.rule();
  const Mesh &m = space.mesh();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  for (int t = 0; t < m.tet_count(); ++t) {
    const Tet &k = m.tets[t];
    Eigen::Matrix<double, 4, 3> g;
    barycentric_gradients(m.vertices[k[0]], m.vertices[k[1]], m.vertices[k[2]], m.vertices[k[3]], g);
    Eigen::RowVector3d mean = Eigen::RowVector3d::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const Vec3 gf = grad_f(space.quadrature_point(t, q));
      mean += rule.weights[q] * Eigen::RowVector3d(gf[0], gf[1], gf[2]);
    }
    for (int a = 0; a < 4; ++a)
      if (space.tet_dofs()[t][a] >= 0)
        b[space.tet_dofs()[t][a]] += space.volumes()[t] * mean.dot(g.row(a));
  }
  return solve_spd(space.stiffness(), b, opt, "ritz_project");
}

double lq_norm(const FemSpace &space, const StateVector &v, double q) {
  if (std::isinf(q))
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (q < 1.0)
    throw ConfigError("q", "L^q norms need q >= 1");
  const QuadratureRule &rule = tet_rule(4);
  double sum = 0.0;
  for (int t = 0; t < space.mesh().tet_count(); ++t) {
    const auto &dofs = space.tet_dofs()[t];
    double nodal[4];
    for (int a = 0; a < 4; ++a)
      nodal[a] = dofs[a] >= 0 ? v[dofs[a]] : 0.0;
    double local = 0.0;
    for (int k = 0; k < rule.size(); ++k) {
      const auto &l = rule.points[k];
      const double y = l[0] * nodal[0] + l[1] * nodal[1] + l[2] * nodal[2] + l[3] * nodal[3];
      const double ay = std::abs(y);
      local += rule.weights[k] * (q == 2.0 ? ay * ay : q == 4.0 ? (ay * ay) * (ay * ay) : std::pow(ay, q));
    }
    sum += local * space.volumes()[t];
  }
  return std::pow(sum, 1.0 / q);
}

double l2_norm(const FemSpace &space, const StateVector &v) {
  return std::sqrt(std::max(0.0, v.dot(space.mass() * v)));
}

double l2_error(const FemSpace &space, const StateVector &v, const ScalarField &f) {
  const QuadratureRule &rule = space.rule();
  double sum = 0.0;
  for (int t = 0; t < space.mesh().tet_count(); ++t) {
    const auto &dofs = space.tet_dofs()[t];
    double local = 0.0;
    for (int k = 0; k < rule.size(); ++k) {
      double y = 0.0;
      for (int a = 0; a < 4; ++a)
        if (dofs[a] >= 0)
          y += rule.points[k][a] * v[dofs[a]];
      const double e = y - f(space.quadrature_point(t, k));
      local += rule.weights[k] * e * e;
    }
    sum += local * space.volumes()[t];
  }
  return std::sqrt(sum);
}

double h1_seminorm_error(const FemSpace &space, const StateVector &v,
                         const std::function<Vec3(const Point &)> &grad_f) {
  const QuadratureRule &rule = space.rule();
  const Mesh &m = space.mesh();
  double sum = 0.0;
  for (int t = 0; t < m.tet_count(); ++t) {
    const Tet &k = m.tets[t];
    Eigen::Matrix<double, 4, 3> g;
    barycentric_gradients(m.vertices[k[0]], m.vertices[k[1]], m.vertices[k[2]], m.vertices[k[3]], g);
    Eigen::RowVector3d gv = Eigen::RowVector3d::Zero();
    for (int a = 0; a < 4; ++a)
      if (space.tet_dofs()[t][a] >= 0)
        gv += v[space.tet_dofs()[t][a]] * g.row(a);
    double local = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec3 gf = grad_f(space.quadrature_point(t, q));
      const double d0 = gv[0] - gf[0], d1 = gv[1] - gf[1], d2 = gv[2] - gf[2];
      local += rule.weights[q] * (d0 * d0 + d1 * d1 + d2 * d2);
    }
    sum += local * space.volumes()[t];
  }
  return std::sqrt(sum);
}

DiscreteEigensystem discrete_eigensystem(const FemSpace &space, int dense_limit) {
  if (space.dof_count() > dense_limit)
    throw Error("dense path refused: " + std::to_string(space.dof_count()) +
                " dofs exceeds the dense eigensolver limit of " + std::to_string(dense_limit) +
                " (fractional norms are a verification-only feature)");
  const Eigen::MatrixXd A(space.stiffness());
  const Eigen::MatrixXd M(space.mass());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
  if (es.info() != Eigen::Success)
    throw Error("generalized eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

StateVector fractional_power(const FemSpace &space, const DiscreteEigensystem &eig,
                             const StateVector &v, double alpha) {
  if (alpha < 0.0 || alpha > 2.0)
    throw ConfigError("alpha", "fractional order must lie in [0, 2]");
  const Eigen::VectorXd coeff = eig.eigenvectors.transpose() * (space.mass() * v);
  const Eigen::VectorXd scaled =
      coeff.cwiseProduct(eig.eigenvalues.unaryExpr([alpha](double l) { return std::pow(l, alpha / 2.0); }));
  return eig.eigenvectors * scaled;
}

double fractional_norm(const FemSpace &space, const DiscreteEigensystem &eig, const StateVector &v,
                       double alpha, double q) {
  return lq_norm(space, fractional_power(space, eig, v, alpha), q);
}

double fractional_norm(const FemSpace &space, const StateVector &v, double alpha, double q,
                       int dense_limit) {
  return fractional_norm(space, discrete_eigensystem(space, dense_limit), v, alpha, q);
}

namespace {

/// Lanczos recurrence for M^{-1} A in the M inner product with full
/// reorthogonalization. `done(m)` is polled after every fifth step and on
/// exit; returning true stops the iteration.
struct Lanczos {
  std::vector<Eigen::VectorXd> Q;
  std::vector<double> alpha, beta;

  Eigen::MatrixXd tridiagonal(int m) const {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < m)
        T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    return T;
  }

  template <class Done> void run(const FemSpace &space, const StateVector &start, int max_m, Done &&done) {
    const int n = space.dof_count();
    SolveOptions mopt;
    mopt.rtol = 1e-13;
    mopt.max_iterations = std::max(200, 10 * static_cast<int>(std::sqrt(n)));
    std::vector<Eigen::VectorXd> MQ;
    Q.push_back(start / std::sqrt(start.dot(space.mass() * start)));
    MQ.push_back(space.mass() * Q.back());
    for (int j = 0; j < max_m; ++j) {
      const Eigen::VectorXd Aq = space.stiffness() * Q[j];
      Eigen::VectorXd w = solve_spd(space.mass(), Aq, mopt, "Lanczos mass solve");
      alpha.push_back(Q[j].dot(Aq));
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < Q.size(); ++i)
          w -= MQ[i].dot(w) * Q[i];
      const double b = std::sqrt(std::max(0.0, w.dot(space.mass() * w)));
      const int m = j + 1;
      const bool breakdown = b <= 1e-14 * std::abs(alpha.back());
      if (breakdown || m == max_m || m % 5 == 0) {
        if (done(m, breakdown || m == max_m))
          return;
      }
      beta.push_back(b);
      Q.push_back(w / b);
      MQ.push_back(space.mass() * Q.back());
    }
  }
};

} // namespace

StateVector discrete_heat(const FemSpace &space, const StateVector &v, double t, double tol) {
  const int n = space.dof_count();
  const double beta0 = l2_norm(space, v);
  if (beta0 == 0.0 || t == 0.0)
    return v;
  Lanczos lz;
  auto evaluate = [&](int m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lz.tridiagonal(m));
    const Eigen::VectorXd w =
        es.eigenvectors() *
        (es.eigenvalues().unaryExpr([t](double l) { return std::exp(-t * l); }).asDiagonal() *
         es.eigenvectors().row(0).transpose());
    StateVector out = StateVector::Zero(n);
    for (int j = 0; j < m; ++j)
      out += w[j] * lz.Q[j];
    return StateVector(beta0 * out);
  };
  StateVector previous, result;
  lz.run(space, v, std::min(n, 400), [&](int m, bool last) {
    StateVector current = evaluate(m);
    const bool converged =
        last || (previous.size() == n && l2_norm(space, current - previous) <= tol * beta0);
    if (converged)
      result = std::move(current);
    else
      previous = std::move(current);
    return converged;
  });
  return result;
}

double max_discrete_eigenvalue(const FemSpace &space, double tol) {
  const int n = space.dof_count();
  // checkerboard start: rich in the high-frequency end of the spectrum
  StateVector start(n);
  for (int i = 0; i < n; ++i) {
    const Point &x = space.mesh().vertices[space.dof_vertex()[i]];
    long s = 0;
    for (double c : x)
      s += std::lround(c / space.mesh().h * std::sqrt(3.0));
    start[i] = (s % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.01 * std::sin(1.0 + i));
  }
  Lanczos lz;
  double previous = 0.0, result = 0.0;
  lz.run(space, start, std::min(n, 300), [&](int m, bool last) {
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lz.tridiagonal(m),
                                                                      Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .maxCoeff();
    const bool converged = last || std::abs(top - previous) <= tol * top;
    previous = top;
    result = top;
    return converged;
  });
  return result;
}

void write_coo(std::ostream &out, const SparseMatrix &m) {
  out.precision(17);
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

} // namespace sacfem
