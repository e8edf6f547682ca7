#pragma once

#include "sacfem/fem.hpp"
#include "sacfem/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sacfem {

enum class SigmaKind { sqrt1py2, tanh_bounded, zero, constant };

SigmaKind parse_sigma_kind(const std::string &name);
std::string to_string(SigmaKind kind);

struct NoiseOptions {
  double rho = 1.5;
  int modes = 64;
  SigmaKind sigma = SigmaKind::sqrt1py2;
  /// Adds a spatially constant mode (amplitude a_1) on one extra Wiener
  /// column, so f_n(x, 0) no longer vanishes on the boundary.
  bool violate_boundary = false;
};

/// rho must exceed this for sum a_n^2 lambda_n to converge.
inline constexpr double kMinimumRho = 1.25;

/// f_n(x, y) = a_n e_n(x) sigma(y) with a_n = lambda_n^{-rho}.
class NoiseModel {
public:
  explicit NoiseModel(const NoiseOptions &opt);

  const NoiseOptions &options() const { return opt_; }
  const SpectralBasis &basis() const { return *basis_; }
  std::shared_ptr<const SpectralBasis> basis_ptr() const { return basis_; }
  const Eigen::VectorXd &amplitudes() const { return amplitudes_; }
  int modes() const { return opt_.modes; }
  /// Number of Wiener columns consumed per step.
  int columns() const { return opt_.modes + (opt_.violate_boundary ? 1 : 0); }
  bool active() const { return opt_.sigma != SigmaKind::zero; }

  double sigma(double y) const;
  double sigma_derivative(double y) const;
  double sigma_lipschitz() const;

  /// sum_n a_n^2 (||e_n||_inf^2 + ||grad e_n||_inf^2)
  double cf_estimate() const { return cf_estimate_; }

  /// sum_n dW_n a_n e_n(x), the spatial factor of the noise increment.
  double field(const Point &x, std::span<const double> dW) const;

private:
  NoiseOptions opt_;
  std::shared_ptr<const SpectralBasis> basis_;
  Eigen::VectorXd amplitudes_;
  double cf_estimate_ = 0.0;
};

/// Validates rho and the mode count, then builds the model.
NoiseModel build_noise_model(const NoiseOptions &opt);

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of stream `index` derived from `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Table of Brownian increments, K rows (steps) by N columns (modes),
/// row-major. Column n is generated from its own stream, so the first columns
/// do not depend on N.
class WienerIncrements {
public:
  WienerIncrements(std::uint64_t seed, int steps, int columns, double tau,
                   std::vector<double> table);

  std::uint64_t seed() const { return seed_; }
  int steps() const { return steps_; }
  int columns() const { return columns_; }
  double tau() const { return tau_; }
  const std::vector<double> &table() const { return table_; }

  std::span<const double> row(int step) const {
    return {table_.data() + static_cast<std::size_t>(step) * columns_,
            static_cast<std::size_t>(columns_)};
  }

  /// Sums `factor` consecutive rows: the increments of the same Brownian
  /// path on the grid with step factor * tau.
  WienerIncrements coarsen(int factor) const;

  void save(const std::filesystem::path &path) const;
  static WienerIncrements load(const std::filesystem::path &path);

  bool operator==(const WienerIncrements &) const = default;

private:
  std::uint64_t seed_;
  int steps_;
  int columns_;
  double tau_;
  std::vector<double> table_;
};

WienerIncrements sample_increments(std::uint64_t seed, int steps, int columns, double tau);

/// Quadrature-point tables that make the noise field cheap to evaluate on a
/// fixed mesh: per-axis coordinates are deduplicated and the sine products
/// are summed axis by axis. Immutable; share between workers.
class NoiseQuadrature {
public:
  NoiseQuadrature(std::shared_ptr<const FemSpace> space, std::shared_ptr<const NoiseModel> noise);

  const FemSpace &space() const { return *space_; }
  const NoiseModel &noise() const { return *noise_; }
  int points_per_tet() const { return points_per_tet_; }

  /// Noise field at every quadrature point, index tet * points_per_tet + q.
  void field(std::span<const double> dW, std::vector<double> &out) const;

private:
  std::shared_ptr<const FemSpace> space_;
  std::shared_ptr<const NoiseModel> noise_;
  int points_per_tet_;
  int kmax_;
  // Per-axis distinct coordinates as sine tables [value][k - 1].
  std::vector<double> sin_x_, sin_y_, sin_z_;
  int ny_ = 0, nz_ = 0;
  // (y, z) coordinate pairs and the per-point indices.
  std::vector<std::array<int, 2>> pairs_;
  std::vector<int> point_x_, point_pair_;
};

/// Scratch buffers for load assembly; one per worker.
struct LoadWorkspace {
  std::vector<double> field;
};

/// Assembles, in one pass over the quadrature points,
///   cubic_i     = \int y^3 phi_i             (if cubic != nullptr)
///   diffusion_i = \int sigma(y) xi phi_i     (if diffusion != nullptr)
/// where xi is the noise field of the increment row dW.
void assemble_loads(const NoiseQuadrature &quad, const StateVector &y, std::span<const double> dW,
                    Eigen::VectorXd *cubic, Eigen::VectorXd *diffusion, LoadWorkspace &ws);

/// g_i = sum_n dW_n \int f_n(x, y_h(x)) phi_i(x) dx
Eigen::VectorXd diffusion_load(const FemSpace &space, const NoiseModel &noise, const StateVector &y,
                               std::span<const double> dW);

/// Hilbert-Schmidt norm of F(y): sqrt(sum_n ||f_n(., y)||_{L2}^2). Only q = 2
/// is supported.
double hs_norm_F(const NoiseModel &noise, const FemSpace &space, const StateVector &y,
                 double q = 2.0);
double hs_norm_F(const NoiseModel &noise, const ModalVector &y, double q = 2.0);
/// Hilbert-Schmidt norm of F(u) - F(v).
double hs_norm_F_difference(const NoiseModel &noise, const FemSpace &space, const StateVector &u,
                            const StateVector &v, double q = 2.0);

struct ConditionEntry {
  std::string name;
  std::vector<double> partial_sums; // after each mode
  double total = 0.0;
  double tail_fraction = 0.0;       // (S_N - S_{N/2}) / S_N, 0 when S_N = 0
  bool pass = false;
};

struct ConditionReport {
  ConditionEntry boundary;   // sup_{x on boundary} sum |f_n(x, 0)|^2
  ConditionEntry growth;     // sum a_n^2 (||e_n||_inf^2 + ||grad e_n||_inf^2)
  ConditionEntry lipschitz;  // sup |sigma'|^2 sum a_n^2 ||e_n||_inf^2
  double cf_estimate = 0.0;
  double tail_tolerance = 0.05;
  bool pass() const { return boundary.pass && growth.pass && lipschitz.pass; }
};

ConditionReport certify_conditions(const NoiseModel &noise, double tail_tolerance = 0.05);

} // namespace sacfem
