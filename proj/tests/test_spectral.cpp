#include "sacfem/error.hpp"
#include "sacfem/noise.hpp"
#include "sacfem/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace sacfem;
using std::numbers::pi;

namespace {

WienerIncrements zero_increments(int steps, int columns, double tau) {
  return WienerIncrements(0, steps, columns, tau,
                          std::vector<double>(static_cast<std::size_t>(steps) * columns, 0.0));
}

NoiseModel silent_noise(int modes = 8) {
  NoiseOptions o;
  o.modes = modes;
  o.sigma = SigmaKind::zero;
  return build_noise_model(o);
}

ModalVector unit(int size, int k, double v = 1.0) {
  ModalVector c = ModalVector::Zero(size);
  c[k] = v;
  return c;
}

} // namespace

TEST_CASE("spectral basis ordering") {
  const SpectralBasis b(8);
  const std::vector<Mode> expected = {{1, 1, 1}, {1, 1, 2}, {1, 2, 1}, {2, 1, 1},
                                      {1, 2, 2}, {2, 1, 2}, {2, 2, 1}, {1, 1, 3}};
  CHECK(b.modes() == expected);
  CHECK(b.lambda(0) == doctest::Approx(3 * pi * pi).epsilon(1e-15));
  const SpectralBasis big(300);
  for (int n = 0; n < big.count(); ++n) {
    CHECK(big.lambda(n) > 0.0);
    if (n > 0) {
      CHECK(big.lambda(n) >= big.lambda(n - 1));
      if (big.lambda(n) == big.lambda(n - 1))
        CHECK(big.modes()[n - 1] < big.modes()[n]);
    }
  }
  // no mode with a smaller eigenvalue was skipped
  int below = 0;
  const double top = big.lambda(big.count() - 1);
  for (int a = 1; a < 20; ++a)
    for (int c = 1; c < 20; ++c)
      for (int d = 1; d < 20; ++d)
        below += pi * pi * (a * a + c * c + d * d) < top;
  CHECK(below <= big.count());
  CHECK_THROWS_AS(SpectralBasis(0), ConfigError);
}

TEST_CASE("eigenfunctions are orthonormal and satisfy the eigen equation") {
  const SpectralBasis b(12);
  const int m = 32;
  for (int i = 0; i < b.count(); ++i)
    for (int j = i; j < b.count(); ++j) {
      double acc = 0.0;
      for (int z = 0; z < m; ++z)
        for (int y = 0; y < m; ++y)
          for (int x = 0; x < m; ++x) {
            const Point p{(x + 0.5) / m, (y + 0.5) / m, (z + 0.5) / m};
            acc += b.eigenfunction(i, p) * b.eigenfunction(j, p);
          }
      acc /= m * m * m;
      CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) <= 1e-6);
    }
  // second differences of e_k against -lambda_k e_k
  const double h = 1e-4;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int n = 0; n < b.count(); ++n)
    for (int trial = 0; trial < 5; ++trial) {
      const Point x{u(gen), u(gen), u(gen)};
      double lap = 0.0;
      for (int a = 0; a < 3; ++a) {
        Point xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        lap += (b.eigenfunction(n, xp) - 2 * b.eigenfunction(n, x) + b.eigenfunction(n, xm)) / (h * h);
        const auto g = b.eigenfunction_gradient(n, x);
        const double fd = (b.eigenfunction(n, xp) - b.eigenfunction(n, xm)) / (2 * h);
        CHECK(std::abs(g[a] - fd) <= 1e-5 * b.lambda(n));
      }
      CHECK(std::abs(lap + b.lambda(n) * b.eigenfunction(n, x)) <= 1e-4 * b.lambda(n));
    }
}

TEST_CASE("heat_apply") {
  const SpectralBasis b(20);
  const ModalVector v = ModalVector::LinSpaced(20, 1.0, 2.0);
  CHECK(heat_apply(b, v, 0.0) == v);
  const ModalVector e = heat_apply(b, unit(20, 0), 0.1);
  CHECK(e[0] == doctest::Approx(std::exp(-3 * pi * pi * 0.1)).epsilon(1e-14));
  CHECK(e[0] == doctest::Approx(0.0518).epsilon(2e-3));
  for (double t : {0.01, 0.1, 1.0})
    CHECK((b.lambdas().array() * (-b.lambdas().array() * t).exp()).maxCoeff() <= 1.0 / (std::numbers::e * t));
  const ModalVector two = heat_apply(b, heat_apply(b, v, 0.03), 0.05);
  CHECK((two - heat_apply(b, v, 0.08)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(heat_apply(b, v, -1.0), ConfigError);
  const ModalVector s = spectral_fractional_power(b, unit(20, 3), 1.0);
  CHECK(s[3] == doctest::Approx(std::sqrt(b.lambda(3))));
}

TEST_CASE("convolve_s0") {
  const SpectralBasis b(6);
  const double tau = 0.01;
  std::vector<ModalVector> zero(50, ModalVector::Zero(6));
  CHECK(convolve_s0(b, zero, tau, 0.5).norm() == 0.0);

  std::vector<ModalVector> g(200, unit(6, 2, 1.5));
  for (double t : {0.01, 0.3, 1.0}) {
    const ModalVector r = convolve_s0(b, g, tau, t);
    const double lam = b.lambda(2);
    CHECK(std::abs(r[2] - 1.5 * (1 - std::exp(-lam * t)) / lam) <= 1e-12);
    CHECK(r[0] == 0.0);
  }
  std::vector<ModalVector> g1(200, unit(6, 0));
  const double lam1 = b.lambda(0);
  const ModalVector r = convolve_s0(b, g1, tau, 2.0);
  CHECK(std::abs(r[0] - 1.0 / lam1) / (1.0 / lam1) <=
        std::max(std::exp(-2 * lam1), 4 * std::numeric_limits<double>::epsilon()));
  CHECK_THROWS_AS(convolve_s0(b, g, tau, 0.015), ConfigError);
  CHECK_THROWS_AS(convolve_s0(b, g, tau, 3.0), ConfigError);
}

TEST_CASE("collocation transforms") {
  const SpectralBasis b(30);
  const CollocationGrid grid(b.max_index());
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  ModalVector c(b.count());
  for (auto &v : c)
    v = normal(gen);
  CHECK((grid.analyze(b, grid.synthesize(b, c)) - c).cwiseAbs().maxCoeff() <= 1e-12);

  // grid values against direct evaluation
  const auto u = grid.synthesize(b, c);
  const int P = grid.points();
  for (int j : {0, 3, P - 1}) {
    const Point x{grid.node(j), grid.node((j + 2) % P), grid.node((j + 5) % P)};
    double direct = 0.0;
    for (int n = 0; n < b.count(); ++n)
      direct += c[n] * b.eigenfunction(n, x);
    CHECK(u[j + P * ((j + 2) % P + P * ((j + 5) % P))] == doctest::Approx(direct).epsilon(1e-12));
  }

  // projection of the cube is exact: compare with a fine midpoint rule
  const SpectralBasis small(7);
  ModalVector cs(small.count());
  for (auto &v : cs)
    v = normal(gen);
  const CollocationGrid sg(small.max_index());
  auto us = sg.synthesize(small, cs);
  for (double &v : us)
    v = v * v * v;
  const ModalVector pseudo = sg.analyze(small, us);
  const ModalVector direct = modal_projection(
      small,
      [&](const Point &x) {
        double v = 0.0;
        for (int n = 0; n < small.count(); ++n)
          v += cs[n] * small.eigenfunction(n, x);
        return v * v * v;
      },
      24);
  CHECK((pseudo - direct).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("modal projection and norms") {
  const SpectralBasis b(10);
  const ModalVector c = modal_projection(b, [](const Point &x) {
    return std::sin(pi * x[0]) * std::sin(pi * x[1]) * std::sin(pi * x[2]);
  });
  CHECK(c[0] == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-12));
  CHECK(c.tail(9).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(modal_lq_norm(b, unit(10, 0), 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(modal_lq_norm(b, unit(10, 0), 4.0) ==
        doctest::Approx(std::pow(64.0 * std::pow(3.0 / 8.0, 3), 0.25)).epsilon(1e-12));
  CHECK(modal_lq_norm(b, unit(10, 0), std::numeric_limits<double>::infinity()) <= 2 * std::numbers::sqrt2);
}

TEST_CASE("logistic flow") {
  for (double tau : {0.01, 0.1, 1.0}) {
    CHECK(logistic_flow(0.0, tau) == 0.0);
    CHECK(logistic_flow(1.0, tau) == 1.0);
    CHECK(logistic_flow(-1.0, tau) == -1.0);
  }
  for (double tau : {0.01, 0.1}) {
    double prev = -1e300;
    for (int i = 0; i <= 600; ++i) {
      const double v = -3.0 + i * 0.01;
      const double f = logistic_flow(v, tau);
      CHECK(f > prev);
      CHECK(std::abs(f) <= std::max(std::abs(v), 1.0) + 1e-15);
      prev = f;
    }
  }
  CHECK(logistic_flow(0.5, 0.5) == doctest::Approx(0.5 / std::sqrt(0.25 + 0.75 * std::exp(-1.0))));
  CHECK(logistic_flow(0.5, 0.5) == doctest::Approx(0.6895).epsilon(1e-4));
}

TEST_CASE("galerkin_path deterministic limits") {
  const SpectralBasis b(10);
  const NoiseModel quiet = silent_noise();
  const double tau = 1e-3;
  const auto inc = zero_increments(100, quiet.columns(), tau);

  for (Scheme s : {Scheme::semi_implicit, Scheme::splitting}) {
    GalerkinOptions o;
    o.scheme = s;
    const auto zero = galerkin_path(b, ModalVector::Zero(10), quiet, inc, tau, o);
    CHECK(zero.states.back().norm() == 0.0);
    CHECK(zero.states.size() == 101);

    // small single mode follows the linearized flow; tau = 1e-4 keeps the
    // rational stability function of the semi-implicit scheme within 1%
    const auto small = galerkin_path(b, unit(10, 0, 1e-3), quiet, zero_increments(1000, quiet.columns(), 1e-4), 1e-4, o);
    const double linear = 1e-3 * std::exp((1 - b.lambda(0)) * 0.1);
    CHECK(std::abs(small.states.back()[0] - linear) <= 0.01 * linear);
  }

  // heat x e^t with the exact linear phase
  GalerkinOptions o;
  o.scheme = Scheme::splitting;
  o.nonlinearity_on = false;
  const ModalVector y0 = ModalVector::LinSpaced(10, 1.0, 0.1);
  const auto lin = galerkin_path(b, y0, quiet, inc, tau, o);
  const ModalVector expect = heat_apply(b, y0, 0.1) * std::exp(0.1);
  CHECK((lin.states.back() - expect).cwiseAbs().maxCoeff() <= 1e-6);

  // semi-implicit linear recursion on a mode
  o.scheme = Scheme::semi_implicit;
  const auto one = galerkin_path(b, unit(10, 4), quiet, zero_increments(1, quiet.columns(), tau), tau, o);
  CHECK(one.states.back()[4] == doctest::Approx((1 + tau) / (1 + tau * b.lambda(4))).epsilon(1e-14));
}

TEST_CASE("galerkin_path moment stability with default noise") {
  const NoiseModel noise = build_noise_model({});
  const SpectralBasis b(64);
  const ModalVector y0 = unit(64, 0, std::pow(2.0, -1.5)); // sin product, amplitude 1
  const double tau = 1e-3;
  const int steps = 500, paths = 64, stride = 50;
  std::vector<double> moment((steps / stride) + 1, 0.0);
  for (int p = 0; p < paths; ++p) {
    const auto inc = sample_increments(derive_seed(11, p), steps, noise.columns(), tau);
    GalerkinOptions o;
    o.stride = stride;
    const auto traj = galerkin_path(b, y0, noise, inc, tau, o);
    for (std::size_t s = 0; s < traj.states.size(); ++s)
      moment[s] += std::pow(modal_lq_norm(b, traj.states[s], 4.0), 4) / paths;
  }
  double peak = 0.0;
  for (double m : moment) {
    CHECK(std::isfinite(m));
    peak = std::max(peak, m);
  }
  CHECK(peak <= 10.0 * moment[0]);
}

TEST_CASE("galerkin_path flags blow-up with the step index") {
  const SpectralBasis b(4);
  const NoiseModel quiet = silent_noise(4);
  GalerkinOptions o;
  o.scheme = Scheme::semi_implicit;
  o.blowup_threshold = 10.0;
  o.seed = 99;
  // explicit cubic with a huge step diverges
  try {
    galerkin_path(b, unit(4, 0, 5.0), quiet, zero_increments(20, 4, 0.5), 0.5, o);
    FAIL("expected PathError");
  } catch (const PathError &e) {
    CHECK(e.step() >= 1);
    CHECK(e.seed() == 99);
  }
}

TEST_CASE("exact OU path") {
  const SpectralBasis b(4);
  const double tau = 0.01;
  const ModalVector y0 = ModalVector::Constant(4, 0.3);
  const auto quiet = exact_ou_path(b, y0, Eigen::VectorXd::Zero(4), zero_increments(50, 4, tau));
  CHECK((quiet.states.back() - heat_apply(b, y0, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);

  // stationary variance a^2 / (2 lambda)
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 1.0);
  const int paths = 1024;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
  for (int p = 0; p < paths; ++p) {
    const auto inc = sample_increments(derive_seed(5, p), 100, 4, tau);
    const ModalVector y = exact_ou_path(b, ModalVector::Zero(4), a, inc).states.back();
    sum += y;
    sq += y.cwiseProduct(y);
  }
  for (int k = 0; k < 4; ++k) {
    const double mean = sum[k] / paths;
    const double var = (sq[k] - paths * mean * mean) / (paths - 1);
    const double target = 1.0 / (2 * b.lambda(k));
    CHECK(std::abs(var - target) <= 3.0 * target * std::sqrt(2.0 / (paths - 1)));
  }

  // Euler on the same table with a = 0 is the rational heat recursion
  const auto euler = ou_euler_path(b, y0, Eigen::VectorXd::Zero(4), zero_increments(10, 4, tau));
  CHECK(euler.states.back()[0] == doctest::Approx(0.3 * std::pow(1 + tau * b.lambda(0), -10)));
}
