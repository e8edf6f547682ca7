#pragma once

#include "sacfem/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace sacfem {

class NoiseModel;
class WienerIncrements;

using ModalVector = Eigen::VectorXd;
using Mode = std::array<int, 3>;

enum class Scheme { semi_implicit, splitting };

/// The first `count` Dirichlet eigenpairs of -Delta on the unit cube, ordered
/// by eigenvalue with lexicographic tie-breaking on (k1, k2, k3).
class SpectralBasis {
public:
  explicit SpectralBasis(int count);

  int count() const { return static_cast<int>(modes_.size()); }
  const std::vector<Mode> &modes() const { return modes_; }
  const Eigen::VectorXd &lambdas() const { return lambdas_; }
  double lambda(int n) const { return lambdas_[n]; }
  /// Largest single-axis wavenumber among the modes.
  int max_index() const { return max_index_; }

  /// e_k(x) = 2^{3/2} sin(k1 pi x1) sin(k2 pi x2) sin(k3 pi x3)
  double eigenfunction(int n, const Point &x) const;
  std::array<double, 3> eigenfunction_gradient(int n, const Point &x) const;

private:
  std::vector<Mode> modes_;
  Eigen::VectorXd lambdas_;
  int max_index_ = 0;
};

/// Exact flow of y' = y - y^3 over time tau: v / sqrt(v^2 + (1 - v^2) e^{-2 tau}).
double logistic_flow(double v, double tau);

/// Coefficient-wise exp(-lambda_k t).
ModalVector heat_apply(const SpectralBasis &basis, const ModalVector &v, double t);

/// (-Delta)^{alpha/2} v
ModalVector spectral_fractional_power(const SpectralBasis &basis, const ModalVector &v,
                                      double alpha);

/// S_0 g at time t for g sampled at s_j = j tau, held constant on each step.
ModalVector convolve_s0(const SpectralBasis &basis, const std::vector<ModalVector> &g, double tau,
                        double t);

/// L2 truncation: c_k = \int f e_k, by a composite midpoint rule with
/// `cells` cells per axis.
ModalVector modal_projection(const SpectralBasis &basis, const std::function<double(const Point &)> &f,
                             int cells = 64);

/// Tensor sine grid x_j = j / (points + 1), j = 1..points, on which products
/// of up to four basis functions of wavenumber <= points / 2 integrate
/// exactly (interior trapezoid rule).
class CollocationGrid {
public:
  explicit CollocationGrid(int max_index);

  int points() const { return points_; }
  int max_index() const { return max_index_; }
  double node(int j) const { return (j + 1.0) / (points_ + 1.0); }
  std::size_t size() const { return static_cast<std::size_t>(points_) * points_ * points_; }

  /// Grid values of sum_n c_n e_n; index j1 + P (j2 + P j3).
  std::vector<double> synthesize(const SpectralBasis &basis, const ModalVector &c) const;
  /// Coefficients \int u e_n of the grid function u.
  ModalVector analyze(const SpectralBasis &basis, const std::vector<double> &u) const;

private:
  int max_index_;
  int points_;
  std::vector<double> sines_; // sines_[j * max_index_ + (k - 1)]
};

/// Discrete L^q norm of sum_n c_n e_n on a collocation grid (q = infinity
/// gives the grid maximum).
double modal_lq_norm(const SpectralBasis &basis, const ModalVector &c, double q,
                     int grid_index = 0);

struct GalerkinOptions {
  Scheme scheme = Scheme::splitting;
  bool nonlinearity_on = true;
  double blowup_threshold = 1e3;
  int stride = 1;
  std::uint64_t seed = 0; // reported on failure
};

struct ModalTrajectory {
  std::vector<double> times;
  std::vector<ModalVector> states;
};

/// Spectral Galerkin path for the truncated system. The cubic and the
/// multiplicative noise are evaluated pseudo-spectrally on a collocation grid
/// with twice the largest wavenumber per axis.
/// Semi-implicit: (1 + tau lambda) y+ = y + tau (y - P y^3) + P F(y) dW.
/// Splitting: y+ = exp(-lambda tau) (Phi_tau(y) + P F(Phi_tau(y)) dW), with
/// Phi_tau the exact flow of y' = y - y^3 (y' = y when the cubic is off).
ModalTrajectory galerkin_path(const SpectralBasis &basis, const ModalVector &y0,
                              const NoiseModel &noise, const WienerIncrements &increments,
                              double tau, const GalerkinOptions &opt = {});

/// Exact Ornstein-Uhlenbeck recursion for dy = Delta y dt + sum_k a_k e_k dW_k,
/// driven by Z = dW / sqrt(tau) from the increment table (column k = mode k).
ModalTrajectory exact_ou_path(const SpectralBasis &basis, const ModalVector &y0,
                              const Eigen::VectorXd &amplitudes, const WienerIncrements &increments,
                              int stride = 1);

/// Linear-implicit Euler for the same equation: (1 + tau lambda) y+ = y + a dW.
ModalTrajectory ou_euler_path(const SpectralBasis &basis, const ModalVector &y0,
                              const Eigen::VectorXd &amplitudes, const WienerIncrements &increments,
                              int stride = 1);

} // namespace sacfem
