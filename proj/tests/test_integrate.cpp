#include "sacfem/error.hpp"
#include "sacfem/integrate.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace sacfem;
using sacfem::testing::loglog_slope;
using std::numbers::pi;

namespace {

std::shared_ptr<const FemSpace> space_ptr(int n) {
  return std::make_shared<const FemSpace>(
      FemSpace::assemble(std::make_shared<const Mesh>(build_box_mesh(n))));
}

std::shared_ptr<const NoiseModel> noise_of(SigmaKind kind, int modes = 16) {
  NoiseOptions o;
  o.modes = modes;
  o.sigma = kind;
  return std::make_shared<const NoiseModel>(build_noise_model(o));
}

Problem problem(SigmaKind kind, double T, bool nonlinear = true) {
  Problem p;
  p.T = T;
  p.noise = noise_of(kind);
  p.nonlinearity_on = nonlinear;
  return p;
}

WienerIncrements zeros(int steps, int columns, double tau) {
  return WienerIncrements(0, steps, columns, tau,
                          std::vector<double>(static_cast<std::size_t>(steps) * columns, 0.0));
}

} // namespace

TEST_CASE("semi-implicit step on a discrete eigenvector") {
  const auto space = space_ptr(4);
  const auto eig = discrete_eigensystem(*space);
  const Problem p = problem(SigmaKind::zero, 1.0, false);
  const double tau = 0.01;
  const std::vector<double> dW(16, 0.0);
  for (int k : {0, 7}) {
    const StateVector v = eig.eigenvectors.col(k);
    const StateVector next = semi_implicit_step(space, p, v, dW, tau, false);
    const StateVector expect = (1 + tau) / (1 + tau * eig.eigenvalues[k]) * v;
    CHECK((next - expect).cwiseAbs().maxCoeff() <= 1e-9 * v.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("splitting step") {
  const auto space = space_ptr(3);
  const Problem p = problem(SigmaKind::zero, 1.0, true);
  const double tau = 0.02;
  const StateVector y = StateVector::Constant(space->dof_count(), 0.4);
  const StateVector z = y.unaryExpr([&](double v) { return logistic_flow(v, tau); });
  const SparseMatrix K = space->mass() + tau * space->stiffness();
  const StateVector next = splitting_step(space, p, y, std::vector<double>(16, 0.0), tau);
  CHECK((K * next - space->mass() * z).norm() <= 1e-9 * (space->mass() * z).norm());
}

TEST_CASE("deterministic self-convergence in time") {
  const auto space = space_ptr(6);
  const Problem p = problem(SigmaKind::zero, 0.1);
  const auto quad = std::make_shared<const NoiseQuadrature>(space, p.noise);
  std::vector<StateVector> finals;
  std::vector<double> taus;
  for (int steps : {10, 20, 40, 80}) {
    const double tau = 0.1 / steps;
    const auto traj = integrate_path(space, quad, p, zeros(steps, 16, tau), Scheme::semi_implicit, steps);
    finals.push_back(traj.states.back());
    taus.push_back(tau);
  }
  std::vector<double> diffs, ts;
  for (int i = 0; i < 3; ++i) {
    diffs.push_back(l2_norm(*space, finals[i] - finals[i + 1]));
    ts.push_back(taus[i]);
  }
  CHECK(std::abs(loglog_slope(ts, diffs) - 1.0) <= 0.2);
}

TEST_CASE("integrate_path against the closed-form linear solution") {
  // sigma = zero, no cubic: y(t) = e^{(1 - 3 pi^2) t} sin sin sin
  const auto space = space_ptr(16);
  const double T = 0.01, tau = 1e-3;
  for (Scheme s : {Scheme::semi_implicit, Scheme::splitting}) {
    const Problem p = problem(SigmaKind::zero, T, false);
    const auto traj = integrate_path(space, nullptr, p, zeros(10, 16, tau), s, 5);
    const ScalarField exact = sine_product(std::exp((1 - 3 * pi * pi) * T)).value;
    const double ref = std::sqrt(1.0 / 8.0) * std::exp((1 - 3 * pi * pi) * T);
    CHECK(l2_error(*space, traj.states.back(), exact) <= 0.02 * ref);
  }
}

TEST_CASE("trajectory layout and diagnostics") {
  const auto space = space_ptr(4);
  Problem p = problem(SigmaKind::sqrt1py2, 0.012);
  const auto inc = sample_increments(3, 12, 16, 1e-3);
  const auto t3 = integrate_path(space, nullptr, p, inc, Scheme::semi_implicit, 3);
  CHECK(t3.states.size() == 12 / 3 + 1);
  CHECK(t3.max_norm.size() == 12);
  CHECK(t3.iterations.size() == 12);
  CHECK(t3.states.front() == l2_project(*space, initial_datum(p)));
  for (std::size_t i = 1; i < t3.times.size(); ++i)
    CHECK(t3.times[i] > t3.times[i - 1]);
  // a stride that does not divide K still ends at T
  const auto t5 = integrate_path(space, nullptr, p, inc, Scheme::semi_implicit, 5);
  CHECK(t5.times == std::vector<double>{0.0, 0.005, 0.01, 0.012});
  CHECK(t5.states.back() == t3.states.back());

  p.T = 0.5;
  CHECK_THROWS_AS(integrate_path(space, nullptr, p, inc, Scheme::semi_implicit), ConfigError);

  std::ostringstream csv;
  write_trajectory_csv(csv, t3);
  CHECK(csv.str().rfind("t,dof,value\n", 0) == 0);
}

TEST_CASE("bitwise reproducibility") {
  const auto space = space_ptr(5);
  const Problem p = problem(SigmaKind::sqrt1py2, 0.05);
  const auto inc = sample_increments(77, 50, 16, 1e-3);
  for (Scheme s : {Scheme::semi_implicit, Scheme::splitting}) {
    const auto a = integrate_path(space, nullptr, p, inc, s, 10);
    const auto b = integrate_path(space, nullptr, p, sample_increments(77, 50, 16, 1e-3), s, 10);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i)
      CHECK(a.states[i] == b.states[i]);
  }
}

TEST_CASE("energy bound without noise") {
  const auto space = space_ptr(6);
  for (Scheme s : {Scheme::semi_implicit, Scheme::splitting}) {
    Problem p = problem(SigmaKind::zero, 0.2);
    p.amplitude = 2.0;
    const auto traj = integrate_path(space, nullptr, p, zeros(100, 16, 2e-3), s, 1);
    const double n0 = l2_norm(*space, traj.states.front());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
      CHECK(l2_norm(*space, traj.states[i]) <= std::exp(traj.times[i]) * n0 * (1 + 1e-12));
  }
}

TEST_CASE("taming is inactive while the max-norm stays below one") {
  const auto space = space_ptr(5);
  Problem p = problem(SigmaKind::sqrt1py2, 0.05);
  p.amplitude = 0.5;
  const auto inc = sample_increments(21, 50, 16, 1e-3);
  auto quad = std::make_shared<const NoiseQuadrature>(space, p.noise);
  Problem tamed = p;
  tamed.taming = true;
  TimeStepper plain(space, quad, p, 1e-3, Scheme::semi_implicit);
  TimeStepper guarded(space, quad, tamed, 1e-3, Scheme::semi_implicit);
  StateVector a = l2_project(*space, initial_datum(p)), b = a;
  for (int s = 0; s < 50; ++s) {
    REQUIRE(a.cwiseAbs().maxCoeff() <= 1.0);
    a = plain.step(a, inc.row(s));
    b = guarded.step(b, inc.row(s));
    CHECK(std::abs(guarded.last_taming_factor() - 1.0) <= 1e-12);
    CHECK(a == b);
  }
  CHECK(taming_factor(0.1, 3.0) == doctest::Approx(1.0 / 1.8));
  CHECK(taming_factor(0.1, 0.9) == 1.0);
}

TEST_CASE("additive linear runs: schemes agree to first order") {
  const auto space = space_ptr(6);
  const Problem p = problem(SigmaKind::constant, 0.1, false);
  const auto fine = sample_increments(5, 160, 16, 0.1 / 160);
  std::vector<double> taus, diffs;
  for (int factor : {8, 4, 2, 1}) {
    const auto inc = fine.coarsen(factor);
    const auto a = integrate_path(space, nullptr, p, inc, Scheme::semi_implicit, inc.steps());
    const auto b = integrate_path(space, nullptr, p, inc, Scheme::splitting, inc.steps());
    taus.push_back(inc.tau());
    diffs.push_back(l2_norm(*space, a.states.back() - b.states.back()));
  }
  CHECK(loglog_slope(taus, diffs) >= 0.8);
}

TEST_CASE("blow-up is flagged with step and seed") {
  const auto space = space_ptr(3);
  Problem p = problem(SigmaKind::sqrt1py2, 0.1);
  p.blowup_threshold = 1e-3;
  const auto inc = sample_increments(1234, 10, 16, 0.01);
  try {
    integrate_path(space, nullptr, p, inc, Scheme::splitting);
    FAIL("expected PathError");
  } catch (const PathError &e) {
    CHECK(e.step() == 1);
    CHECK(e.seed() == 1234);
  }
  Problem none = p;
  none.noise = nullptr;
  CHECK_THROWS_AS(integrate_path(space, nullptr, none, inc, Scheme::splitting), ConfigError);
}
