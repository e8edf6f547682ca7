#pragma once

#include "sacfem/fem.hpp"
#include "sacfem/noise.hpp"
#include "sacfem/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sacfem {

enum class InitialKind { smooth, rough, custom };

Scheme parse_scheme(const std::string &name);
std::string to_string(Scheme scheme);
InitialKind parse_initial_kind(const std::string &name);
std::string to_string(InitialKind kind);

struct Problem {
  double T = 0.25;
  InitialKind y0_kind = InitialKind::smooth;
  double amplitude = 1.0;       // smooth: amplitude of the sine product
  ScalarField custom;           // custom: y0 as a function
  std::shared_ptr<const NoiseModel> noise;
  bool nonlinearity_on = true;
  bool taming = false;
  double blowup_threshold = 1e3;
};

/// smooth: amplitude * sin(pi x) sin(pi y) sin(pi z); rough: sign(x1 - 1/2).
ScalarField initial_datum(const Problem &problem);

/// Precomputed per-level state for time stepping: the implicit operator
/// M + tau A, its solver, and the load workspace. Not thread-safe; one per
/// worker and level. The space and quadrature tables are shared.
class TimeStepper {
public:
  TimeStepper(std::shared_ptr<const FemSpace> space, std::shared_ptr<const NoiseQuadrature> quad,
              const Problem &problem, double tau, Scheme scheme);
  TimeStepper(const TimeStepper &) = delete;
  TimeStepper &operator=(const TimeStepper &) = delete;

  const FemSpace &space() const { return *space_; }
  double tau() const { return tau_; }
  Scheme scheme() const { return scheme_; }

  /// One step from y with increment row dW. Throws PathError (with `step`
  /// and `seed`) on a non-finite state or blow-up.
  StateVector step(const StateVector &y, std::span<const double> dW, long step = 0,
                   std::uint64_t seed = 0);

  int last_iterations() const { return solver_.last_iterations(); }
  /// Taming factor used by the last semi-implicit step (1 when untamed).
  double last_taming_factor() const { return last_taming_; }

private:
  std::shared_ptr<const FemSpace> space_;
  std::shared_ptr<const NoiseQuadrature> quad_;
  Problem problem_;
  double tau_;
  Scheme scheme_;
  SpdSolver solver_;
  LoadWorkspace ws_;
  Eigen::VectorXd cubic_, diffusion_;
  double last_taming_ = 1.0;
};

/// Tamed cubic factor 1 / (1 + tau max(0, ||y||_inf^2 - 1)).
double taming_factor(double tau, double max_norm);

/// Single steps built on a throwaway TimeStepper (convenient, not fast).
StateVector semi_implicit_step(std::shared_ptr<const FemSpace> space, const Problem &problem,
                               const StateVector &y, std::span<const double> dW, double tau,
                               bool taming);
StateVector splitting_step(std::shared_ptr<const FemSpace> space, const Problem &problem,
                           const StateVector &y, std::span<const double> dW, double tau);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> max_norm;   // per step, after the step
  std::vector<int> iterations;    // per step
};

/// Integrates from P_h y0 over increments.steps() steps of increments.tau().
/// States are kept at multiples of `stride` and at T.
Trajectory integrate_path(std::shared_ptr<const FemSpace> space,
                          std::shared_ptr<const NoiseQuadrature> quad, const Problem &problem,
                          const WienerIncrements &increments, Scheme scheme, int stride = 1);
Trajectory integrate_path(TimeStepper &stepper, const StateVector &y0,
                          const WienerIncrements &increments, int stride = 1);

/// CSV with columns t, dof, value.
void write_trajectory_csv(std::ostream &out, const Trajectory &traj);

} // namespace sacfem
