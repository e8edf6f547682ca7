#include "sacfem/integrate.hpp"
#include "sacfem/error.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace sacfem {

using std::numbers::pi;

Scheme parse_scheme(const std::string &name) {
  if (name == "semi-implicit" || name == "semi_implicit")
    return Scheme::semi_implicit;
  if (name == "splitting")
    return Scheme::splitting;
  throw ConfigError("scheme", "unknown scheme '" + name + "' (expected semi-implicit, splitting)");
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::semi_implicit ? "semi-implicit" : "splitting";
}

InitialKind parse_initial_kind(const std::string &name) {
  if (name == "smooth")
    return InitialKind::smooth;
  if (name == "rough")
    return InitialKind::rough;
  if (name == "custom")
    return InitialKind::custom;
  throw ConfigError("y0", "unknown initial datum '" + name + "' (expected smooth, rough, custom)");
}

std::string to_string(InitialKind kind) {
  switch (kind) {
  case InitialKind::smooth:
    return "smooth";
  case InitialKind::rough:
    return "rough";
  case InitialKind::custom:
    return "custom";
  }
  return "?";
}

ScalarField initial_datum(const Problem &problem) {
  switch (problem.y0_kind) {
  case InitialKind::smooth:
    return sine_product(problem.amplitude).value;
  case InitialKind::rough:
    return [](const Point &x) { return x[0] > 0.5 ? 1.0 : (x[0] < 0.5 ? -1.0 : 0.0); };
  case InitialKind::custom:
    if (!problem.custom)
      throw ConfigError("y0", "custom initial datum without a function");
    return problem.custom;
  }
  throw ConfigError("y0", "unknown initial datum");
}

double taming_factor(double tau, double max_norm) {
  return 1.0 / (1.0 + tau * std::max(0.0, max_norm * max_norm - 1.0));
}

namespace {

SparseMatrix implicit_operator(const FemSpace &space, double tau) {
  SparseMatrix K = space.mass() + tau * space.stiffness();
  K.makeCompressed();
  return K;
}

void validate(const Problem &problem, double tau) {
  if (!(tau > 0.0))
    throw ConfigError("tau", "time step must be positive");
  if (!(problem.T > 0.0))
    throw ConfigError("T", "final time must be positive");
  if (!problem.noise)
    throw ConfigError("noise", "problem has no noise model (use sigma_kind = zero to disable)");
}

} // namespace

TimeStepper::TimeStepper(std::shared_ptr<const FemSpace> space,
                         std::shared_ptr<const NoiseQuadrature> quad, const Problem &problem,
                         double tau, Scheme scheme)
    : space_(std::move(space)), quad_(std::move(quad)), problem_(problem), tau_(tau),
      scheme_(scheme),
      solver_((validate(problem, tau), implicit_operator(*space_, tau)), SolveOptions{},
              "implicit step") {
  if (!quad_ || &quad_->space() != space_.get())
    throw ConfigError("quadrature", "noise quadrature was built for a different space");
  if (&quad_->noise() != problem_.noise.get())
    throw ConfigError("quadrature", "noise quadrature was built for a different noise model");
}

StateVector TimeStepper::step(const StateVector &y, std::span<const double> dW, long step,
                              std::uint64_t seed) {
  const FemSpace &space = *space_;
  if (static_cast<int>(dW.size()) < problem_.noise->columns())
    throw ConfigError("noise.N", "increment row is shorter than the number of noise columns");
  Eigen::VectorXd rhs;
  if (scheme_ == Scheme::semi_implicit) {
    assemble_loads(*quad_, y, dW, problem_.nonlinearity_on ? &cubic_ : nullptr, &diffusion_, ws_);
    last_taming_ = problem_.taming ? taming_factor(tau_, y.size() ? y.cwiseAbs().maxCoeff() : 0.0)
                                   : 1.0;
    rhs = (1.0 + tau_) * (space.mass() * y) + diffusion_;
    if (problem_.nonlinearity_on)
      rhs -= (tau_ * last_taming_) * cubic_;
  } else {
    StateVector z(y.size());
    if (problem_.nonlinearity_on)
      for (Eigen::Index i = 0; i < y.size(); ++i)
        z[i] = logistic_flow(y[i], tau_);
    else
      z = std::exp(tau_) * y;
    assemble_loads(*quad_, z, dW, nullptr, &diffusion_, ws_);
    rhs = space.mass() * z + diffusion_;
  }
  StateVector next = solver_.solve(rhs, y);
  if (!next.allFinite())
    throw PathError("non-finite state", step, seed);
  const double m = next.size() ? next.cwiseAbs().maxCoeff() : 0.0;
  if (m > problem_.blowup_threshold)
    throw PathError("max-norm " + std::to_string(m) + " exceeded the blow-up threshold", step, seed);
  return next;
}

namespace {

std::shared_ptr<const NoiseQuadrature> quadrature_for(const std::shared_ptr<const FemSpace> &space,
                                                      const Problem &problem) {
  if (!problem.noise)
    throw ConfigError("noise", "problem has no noise model (use sigma_kind = zero to disable)");
  return std::make_shared<const NoiseQuadrature>(space, problem.noise);
}

} // namespace

StateVector semi_implicit_step(std::shared_ptr<const FemSpace> space, const Problem &problem,
                               const StateVector &y, std::span<const double> dW, double tau,
                               bool taming) {
  Problem p = problem;
  p.taming = taming;
  auto quad = quadrature_for(space, p);
  TimeStepper stepper(space, quad, p, tau, Scheme::semi_implicit);
  return stepper.step(y, dW);
}

StateVector splitting_step(std::shared_ptr<const FemSpace> space, const Problem &problem,
                           const StateVector &y, std::span<const double> dW, double tau) {
  auto quad = quadrature_for(space, problem);
  TimeStepper stepper(space, quad, problem, tau, Scheme::splitting);
  return stepper.step(y, dW);
}

Trajectory integrate_path(TimeStepper &stepper, const StateVector &y0,
                          const WienerIncrements &increments, int stride) {
  if (std::abs(increments.tau() - stepper.tau()) > 1e-14 * stepper.tau())
    throw ConfigError("tau", "increment table step differs from the integrator step");
  stride = std::max(stride, 1);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(y0);
  StateVector y = y0;
  const int K = increments.steps();
  traj.max_norm.reserve(K);
  traj.iterations.reserve(K);
  for (int s = 0; s < K; ++s) {
    y = stepper.step(y, increments.row(s), s + 1, increments.seed());
    traj.max_norm.push_back(y.size() ? y.cwiseAbs().maxCoeff() : 0.0);
    traj.iterations.push_back(stepper.last_iterations());
    if ((s + 1) % stride == 0 || s + 1 == K) {
      traj.times.push_back((s + 1) * increments.tau());
      traj.states.push_back(y);
    }
  }
  return traj;
}

Trajectory integrate_path(std::shared_ptr<const FemSpace> space,
                          std::shared_ptr<const NoiseQuadrature> quad, const Problem &problem,
                          const WienerIncrements &increments, Scheme scheme, int stride) {
  const double tau = increments.tau();
  validate(problem, tau);
  if (std::abs(tau * increments.steps() - problem.T) > 1e-9 * problem.T)
    throw ConfigError("T", "tau * steps must equal T");
  if (!quad)
    quad = quadrature_for(space, problem);
  TimeStepper stepper(space, quad, problem, tau, scheme);
  const StateVector y0 = l2_project(*space, initial_datum(problem));
  return integrate_path(stepper, y0, increments, stride);
}

void write_trajectory_csv(std::ostream &out, const Trajectory &traj) {
  out << "t,dof,value\n";
  out.precision(17);
  for (std::size_t s = 0; s < traj.states.size(); ++s)
    for (Eigen::Index i = 0; i < traj.states[s].size(); ++i)
      out << traj.times[s] << ',' << i << ',' << traj.states[s][i] << '\n';
}

} // namespace sacfem
