#pragma once

#include "sacfem/mesh.hpp"
#include "sacfem/quadrature.hpp"

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace sacfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec3 = std::array<double, 3>;

/// Interior (homogeneous Dirichlet) nodal coefficients of a function in X_h.
/// Boundary values are implicitly zero.
using StateVector = Eigen::VectorXd;

using ScalarField = std::function<double(const Point &)>;

/// A smooth function together with the derivatives the error norms and the
/// Ritz projection need. Unused members may be left empty.
struct AnalyticFunction {
  ScalarField value;
  std::function<Vec3(const Point &)> gradient;
  ScalarField laplacian;
};

/// sin(pi x) sin(pi y) sin(pi z), the first Dirichlet eigenfunction up to scale.
AnalyticFunction sine_product(double amplitude = 1.0);

struct SolveOptions {
  double rtol = 1e-10;
  int max_iterations = 0; // 0: 10 * sqrt(dof)
};

/// The P1 space on a mesh with interior-only degrees of freedom, plus the
/// assembled mass and stiffness matrices. Immutable after assembly.
class FemSpace {
public:
  static FemSpace assemble(std::shared_ptr<const Mesh> mesh, int quadrature_order = 4);

  const Mesh &mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int dof_count() const { return dof_count_; }
  double h() const { return mesh_->h; }
  int quadrature_order() const { return quadrature_order_; }
  const QuadratureRule &rule() const { return tet_rule(quadrature_order_); }

  const std::vector<int> &interior_index() const { return interior_index_; }
  const std::vector<int> &dof_vertex() const { return dof_vertex_; }
  /// Per tet, the dof of each vertex or -1 for boundary vertices.
  const std::vector<std::array<int, 4>> &tet_dofs() const { return tet_dofs_; }
  const std::vector<double> &volumes() const { return volumes_; }

  const SparseMatrix &mass() const { return mass_; }
  const SparseMatrix &stiffness() const { return stiffness_; }

  Point quadrature_point(int tet, int q) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  int quadrature_order_ = 4;
  int dof_count_ = 0;
  std::vector<int> interior_index_;
  std::vector<int> dof_vertex_;
  std::vector<std::array<int, 4>> tet_dofs_;
  std::vector<double> volumes_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
};

/// Element matrices of a single tetrahedron (local vertex order).
struct ElementMatrices {
  Eigen::Matrix4d mass;
  Eigen::Matrix4d stiffness;
  double volume = 0.0;
};
ElementMatrices element_matrices(const Point &a, const Point &b, const Point &c, const Point &d);

/// Preconditioned CG on a symmetric positive definite system. Throws
/// SolverError when ||A x - b|| > rtol ||b|| after the iteration budget.
Eigen::VectorXd solve_spd(const SparseMatrix &A, const Eigen::VectorXd &b, const SolveOptions &opt,
                          const std::string &what, const Eigen::VectorXd *guess = nullptr);

/// Reusable Jacobi-preconditioned CG for a fixed matrix. Not thread-safe;
/// keep one per worker.
class SpdSolver {
public:
  SpdSolver(SparseMatrix matrix, SolveOptions opt, std::string what);
  // The CG object keeps a reference to matrix_, so the solver must not move.
  SpdSolver(const SpdSolver &) = delete;
  SpdSolver &operator=(const SpdSolver &) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd &b, const Eigen::VectorXd &guess);
  int last_iterations() const { return last_iterations_; }
  const SparseMatrix &matrix() const { return matrix_; }

private:
  SparseMatrix matrix_;
  SolveOptions opt_;
  std::string what_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg_;
  int last_iterations_ = 0;
};

StateVector interpolate(const FemSpace &space, const ScalarField &f);

/// b_i = \int f phi_i dx with the space's quadrature rule.
Eigen::VectorXd load_vector(const FemSpace &space, const ScalarField &f);

/// L2 projection P_h f.
StateVector l2_project(const FemSpace &space, const ScalarField &f, const SolveOptions &opt = {});

/// L2 projection of a function living on a finer nested space.
StateVector l2_project(const FemSpace &coarse, const FemSpace &fine, const StateVector &v_fine,
                       const SolveOptions &opt = {});

/// w = Delta_h v, i.e. M w = -A v.
StateVector apply_discrete_laplacian(const FemSpace &space, const StateVector &v,
                                     const SolveOptions &opt = {});

/// Ritz projection Delta_h^{-1} P_h Delta f: A c = -b, b_i = \int (Delta f) phi_i.
StateVector ritz_project(const FemSpace &space, const AnalyticFunction &f,
                         const SolveOptions &opt = {});

/// Ritz projection from the weak form: A c = b, b_i = \int grad f . grad phi_i.
/// Works for f whose Laplacian exists only in the distributional sense.
StateVector ritz_project_weak(const FemSpace &space, const std::function<Vec3(const Point &)> &grad_f,
                              const SolveOptions &opt = {});

/// ||v||_{L^q}; q = infinity gives the nodal maximum.
double lq_norm(const FemSpace &space, const StateVector &v, double q);

/// sqrt(v^T M v)
double l2_norm(const FemSpace &space, const StateVector &v);

/// ||v_h - f||_{L^2} by quadrature.
double l2_error(const FemSpace &space, const StateVector &v, const ScalarField &f);

/// ||grad(v_h - f)||_{L^2} by quadrature.
double h1_seminorm_error(const FemSpace &space, const StateVector &v,
                         const std::function<Vec3(const Point &)> &grad_f);

/// Generalized eigendecomposition A V = M V diag(lambda), V^T M V = I.
struct DiscreteEigensystem {
  Eigen::VectorXd eigenvalues; // ascending
  Eigen::MatrixXd eigenvectors;
};

inline constexpr int kDenseEigenLimit = 3000;

/// Dense path, refused above `dense_limit` dofs (verification only).
DiscreteEigensystem discrete_eigensystem(const FemSpace &space, int dense_limit = kDenseEigenLimit);

/// (-Delta_h)^{alpha/2} v
StateVector fractional_power(const FemSpace &space, const DiscreteEigensystem &eig,
                             const StateVector &v, double alpha);

/// ||(-Delta_h)^{alpha/2} v||_{L^q}
double fractional_norm(const FemSpace &space, const DiscreteEigensystem &eig, const StateVector &v,
                       double alpha, double q);
double fractional_norm(const FemSpace &space, const StateVector &v, double alpha, double q,
                       int dense_limit = kDenseEigenLimit);

/// exp(t Delta_h) v by Lanczos in the M-inner product.
StateVector discrete_heat(const FemSpace &space, const StateVector &v, double t,
                          double tol = 1e-11);

/// Largest eigenvalue of A v = lambda M v by Lanczos (no dense fallback).
double max_discrete_eigenvalue(const FemSpace &space, double tol = 1e-10);

/// Coordinate-format dump "i j value", one entry per line.
void write_coo(std::ostream &out, const SparseMatrix &m);

} // namespace sacfem
