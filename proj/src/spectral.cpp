#include "sacfem/spectral.hpp"
#include "sacfem/error.hpp"
#include "sacfem/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sacfem {

using std::numbers::pi;

namespace {

const double kNorm = 2.0 * std::numbers::sqrt2; // 2^{3/2}

int squared(const Mode &k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

} // namespace

SpectralBasis::SpectralBasis(int count) {
  if (count < 1)
    throw ConfigError("modes", "spectral truncation must be at least 1");
  // Every mode with a component above L has |k|^2 >= (L+1)^2 + 2, so the
  // first `count` modes are all inside the box once the count-th smallest
  // |k|^2 over the box is below that.
  for (int L = 1;; ++L) {
    std::vector<Mode> box;
    for (int a = 1; a <= L; ++a)
      for (int b = 1; b <= L; ++b)
        for (int c = 1; c <= L; ++c)
          box.push_back({a, b, c});
    if (static_cast<int>(box.size()) < count)
      continue;
    std::sort(box.begin(), box.end(), [](const Mode &x, const Mode &y) {
      const int sx = squared(x), sy = squared(y);
      return sx != sy ? sx < sy : x < y;
    });
    if (squared(box[count - 1]) >= (L + 1) * (L + 1) + 2)
      continue;
    modes_.assign(box.begin(), box.begin() + count);
    break;
  }
  lambdas_.resize(count);
  for (int n = 0; n < count; ++n) {
    lambdas_[n] = pi * pi * squared(modes_[n]);
    for (int k : modes_[n])
      max_index_ = std::max(max_index_, k);
  }
}

double SpectralBasis::eigenfunction(int n, const Point &x) const {
  const Mode &k = modes_[n];
  return kNorm * std::sin(k[0] * pi * x[0]) * std::sin(k[1] * pi * x[1]) *
         std::sin(k[2] * pi * x[2]);
}

std::array<double, 3> SpectralBasis::eigenfunction_gradient(int n, const Point &x) const {
  const Mode &k = modes_[n];
  double s[3], c[3];
  for (int a = 0; a < 3; ++a) {
    s[a] = std::sin(k[a] * pi * x[a]);
    c[a] = k[a] * pi * std::cos(k[a] * pi * x[a]);
  }
  return {kNorm * c[0] * s[1] * s[2], kNorm * s[0] * c[1] * s[2], kNorm * s[0] * s[1] * c[2]};
}

double logistic_flow(double v, double tau) {
  return v / std::sqrt(v * v + (1.0 - v * v) * std::exp(-2.0 * tau));
}

ModalVector heat_apply(const SpectralBasis &basis, const ModalVector &v, double t) {
  if (!(t >= 0.0))
    throw ConfigError("t", "heat semigroup needs t >= 0");
  return (v.array() * (-basis.lambdas().array() * t).exp()).matrix();
}

ModalVector spectral_fractional_power(const SpectralBasis &basis, const ModalVector &v,
                                      double alpha) {
  return (v.array() * basis.lambdas().array().pow(alpha / 2.0)).matrix();
}

ModalVector convolve_s0(const SpectralBasis &basis, const std::vector<ModalVector> &g, double tau,
                        double t) {
  if (!(tau > 0.0))
    throw ConfigError("tau", "time step must be positive");
  const double steps_real = t / tau;
  const long steps = std::lround(steps_real);
  if (steps < 0 || std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real))
    throw ConfigError("t", "time is not on the sample grid");
  if (steps > static_cast<long>(g.size()))
    throw ConfigError("t", "time lies beyond the sampled interval");
  const Eigen::ArrayXd lam = basis.lambdas().array();
  const Eigen::ArrayXd weight = (1.0 - (-lam * tau).exp()) / lam;
  const Eigen::ArrayXd decay = (-lam * tau).exp();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(basis.count());
  for (long j = 0; j < steps; ++j)
    acc = acc * decay + g[j].array() * weight;
  return acc.matrix();
}

ModalVector modal_projection(const SpectralBasis &basis,
                             const std::function<double(const Point &)> &f, int cells) {
  const double h = 1.0 / cells;
  const double w = h * h * h;
  ModalVector c = ModalVector::Zero(basis.count());
  std::vector<double> s(static_cast<std::size_t>(cells) * basis.max_index());
  for (int j = 0; j < cells; ++j)
    for (int k = 1; k <= basis.max_index(); ++k)
      s[j * basis.max_index() + k - 1] = std::sin(k * pi * (j + 0.5) * h);
  const int K = basis.max_index();
  for (int i3 = 0; i3 < cells; ++i3)
    for (int i2 = 0; i2 < cells; ++i2)
      for (int i1 = 0; i1 < cells; ++i1) {
        const double v = f({(i1 + 0.5) * h, (i2 + 0.5) * h, (i3 + 0.5) * h}) * w * kNorm;
        if (v == 0.0)
          continue;
        for (int n = 0; n < basis.count(); ++n) {
          const Mode &k = basis.modes()[n];
          c[n] += v * s[i1 * K + k[0] - 1] * s[i2 * K + k[1] - 1] * s[i3 * K + k[2] - 1];
        }
      }
  return c;
}

CollocationGrid::CollocationGrid(int max_index) : max_index_(max_index), points_(2 * max_index) {
  if (max_index < 1)
    throw ConfigError("max_index", "collocation grid needs a positive wavenumber");
  sines_.resize(static_cast<std::size_t>(points_) * max_index_);
  for (int j = 0; j < points_; ++j)
    for (int k = 1; k <= max_index_; ++k)
      sines_[j * max_index_ + k - 1] = std::sin(k * pi * node(j));
}

std::vector<double> CollocationGrid::synthesize(const SpectralBasis &basis,
                                                const ModalVector &c) const {
  const int K = max_index_, P = points_;
  if (basis.max_index() > K)
    throw ConfigError("max_index", "basis wavenumber exceeds the collocation grid");
  // coefficient cube C[k1][k2][k3]
  std::vector<double> C(static_cast<std::size_t>(K) * K * K, 0.0);
  for (int n = 0; n < basis.count(); ++n) {
    const Mode &k = basis.modes()[n];
    C[((k[0] - 1) * K + (k[1] - 1)) * K + (k[2] - 1)] = c[n];
  }
  // contract k3 -> j3: A[k1][k2][j3]
  std::vector<double> A(static_cast<std::size_t>(K) * K * P, 0.0);
  for (int k12 = 0; k12 < K * K; ++k12)
    for (int k3 = 0; k3 < K; ++k3) {
      const double v = C[k12 * K + k3];
      if (v == 0.0)
        continue;
      for (int j3 = 0; j3 < P; ++j3)
        A[k12 * P + j3] += v * sines_[j3 * K + k3];
    }
  // contract k2 -> j2: B[k1][j2][j3]
  std::vector<double> B(static_cast<std::size_t>(K) * P * P, 0.0);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = 0; k2 < K; ++k2)
      for (int j2 = 0; j2 < P; ++j2) {
        const double s = sines_[j2 * K + k2];
        const double *a = &A[(k1 * K + k2) * P];
        double *b = &B[(k1 * P + j2) * P];
        for (int j3 = 0; j3 < P; ++j3)
          b[j3] += s * a[j3];
      }
  // contract k1 -> j1, output index j1 + P (j2 + P j3)
  std::vector<double> u(size(), 0.0);
  for (int k1 = 0; k1 < K; ++k1)
    for (int j2 = 0; j2 < P; ++j2)
      for (int j3 = 0; j3 < P; ++j3) {
        const double v = B[(k1 * P + j2) * P + j3] * kNorm;
        if (v == 0.0)
          continue;
        double *row = &u[static_cast<std::size_t>(P) * (j2 + P * j3)];
        for (int j1 = 0; j1 < P; ++j1)
          row[j1] += v * sines_[j1 * K + k1];
      }
  return u;
}

ModalVector CollocationGrid::analyze(const SpectralBasis &basis, const std::vector<double> &u) const {
  const int K = max_index_, P = points_;
  if (basis.max_index() > K)
    throw ConfigError("max_index", "basis wavenumber exceeds the collocation grid");
  // contract j1 -> k1: A[k1][j2][j3]
  std::vector<double> A(static_cast<std::size_t>(K) * P * P, 0.0);
  for (int j3 = 0; j3 < P; ++j3)
    for (int j2 = 0; j2 < P; ++j2) {
      const double *row = &u[static_cast<std::size_t>(P) * (j2 + P * j3)];
      for (int k1 = 0; k1 < K; ++k1) {
        double acc = 0.0;
        for (int j1 = 0; j1 < P; ++j1)
          acc += row[j1] * sines_[j1 * K + k1];
        A[(k1 * P + j2) * P + j3] = acc;
      }
    }
  // contract j2 -> k2: B[k1][k2][j3]
  std::vector<double> B(static_cast<std::size_t>(K) * K * P, 0.0);
  for (int k1 = 0; k1 < K; ++k1)
    for (int j2 = 0; j2 < P; ++j2)
      for (int k2 = 0; k2 < K; ++k2) {
        const double s = sines_[j2 * K + k2];
        const double *a = &A[(k1 * P + j2) * P];
        double *b = &B[(k1 * K + k2) * P];
        for (int j3 = 0; j3 < P; ++j3)
          b[j3] += s * a[j3];
      }
  const double w = kNorm / std::pow(P + 1.0, 3);
  ModalVector c(basis.count());
  for (int n = 0; n < basis.count(); ++n) {
    const Mode &k = basis.modes()[n];
    const double *b = &B[((k[0] - 1) * K + (k[1] - 1)) * P];
    double acc = 0.0;
    for (int j3 = 0; j3 < P; ++j3)
      acc += b[j3] * sines_[j3 * K + k[2] - 1];
    c[n] = acc * w;
  }
  return c;
}

double modal_lq_norm(const SpectralBasis &basis, const ModalVector &c, double q, int grid_index) {
  const CollocationGrid grid(std::max({grid_index, basis.max_index(), 16}));
  const std::vector<double> u = grid.synthesize(basis, c);
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : u)
      m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0))
    throw ConfigError("q", "L^q norm needs q >= 1");
  double acc = 0.0;
  for (double v : u)
    acc += std::pow(std::abs(v), q);
  return std::pow(acc / std::pow(grid.points() + 1.0, 3), 1.0 / q);
}

namespace {

void check_increments(const SpectralBasis &basis, const WienerIncrements &inc, int columns) {
  if (inc.columns() < columns)
    throw ConfigError("noise.N", "increment table has fewer columns than noise modes");
  if (basis.count() < 1)
    throw ConfigError("modes", "empty basis");
}

void record(ModalTrajectory &traj, int step, double tau, const ModalVector &y, int stride,
            int steps) {
  if (step % stride == 0 || step == steps) {
    traj.times.push_back(step * tau);
    traj.states.push_back(y);
  }
}

} // namespace

ModalTrajectory galerkin_path(const SpectralBasis &basis, const ModalVector &y0,
                              const NoiseModel &noise, const WienerIncrements &increments,
                              double tau, const GalerkinOptions &opt) {
  if (!(tau > 0.0))
    throw ConfigError("tau", "time step must be positive");
  if (y0.size() != basis.count())
    throw ConfigError("y0", "initial modal vector does not match the basis");
  check_increments(basis, increments, noise.columns());
  const int stride = std::max(opt.stride, 1);
  const CollocationGrid grid(std::max(basis.max_index(), noise.basis().max_index()));
  const Eigen::ArrayXd lam = basis.lambdas().array();
  const Eigen::ArrayXd implicit = 1.0 / (1.0 + tau * lam);
  const Eigen::ArrayXd decay = (-lam * tau).exp();
  const double growth = std::exp(tau);
  const int steps = increments.steps();

  ModalTrajectory traj;
  ModalVector y = y0;
  record(traj, 0, tau, y, stride, steps);
  ModalVector noise_coeffs(noise.modes());
  for (int step = 0; step < steps; ++step) {
    const auto dW = increments.row(step);
    std::vector<double> u = grid.synthesize(basis, y);
    if (opt.scheme == Scheme::splitting) {
      for (double &v : u)
        v = opt.nonlinearity_on ? logistic_flow(v, tau) : growth * v;
    }
    ModalVector drift = ModalVector::Zero(basis.count());
    if (opt.scheme == Scheme::semi_implicit && opt.nonlinearity_on) {
      std::vector<double> cube(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        cube[i] = u[i] * u[i] * u[i];
      drift = grid.analyze(basis, cube);
    }
    ModalVector stochastic = ModalVector::Zero(basis.count());
    if (noise.active()) {
      for (int n = 0; n < noise.modes(); ++n)
        noise_coeffs[n] = noise.amplitudes()[n] * dW[n];
      std::vector<double> xi = grid.synthesize(noise.basis(), noise_coeffs);
      const double shift =
          noise.options().violate_boundary ? noise.amplitudes()[0] * dW[noise.modes()] : 0.0;
      for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = noise.sigma(u[i]) * (xi[i] + shift);
      stochastic = grid.analyze(basis, xi);
    }
    if (opt.scheme == Scheme::semi_implicit) {
      y = ((y + tau * (y - drift) + stochastic).array() * implicit).matrix();
    } else {
      const ModalVector flowed = opt.nonlinearity_on ? grid.analyze(basis, u) : ModalVector(growth * y);
      y = ((flowed + stochastic).array() * decay).matrix();
    }
    if (!y.allFinite() || y.cwiseAbs().sum() * 2.0 * std::numbers::sqrt2 > opt.blowup_threshold) {
      // the coefficient sum bounds the sup norm; confirm on the grid
      const std::vector<double> check = grid.synthesize(basis, y);
      double m = 0.0;
      bool finite = true;
      for (double v : check) {
        finite = finite && std::isfinite(v);
        m = std::max(m, std::abs(v));
      }
      if (!finite || m > opt.blowup_threshold)
        throw PathError(finite ? "Galerkin path exceeded the blow-up threshold"
                               : "Galerkin path produced a non-finite state",
                        step + 1, opt.seed);
    }
    record(traj, step + 1, tau, y, stride, steps);
  }
  return traj;
}

ModalTrajectory exact_ou_path(const SpectralBasis &basis, const ModalVector &y0,
                              const Eigen::VectorXd &amplitudes, const WienerIncrements &increments,
                              int stride) {
  check_increments(basis, increments, basis.count());
  if (amplitudes.size() != basis.count() || y0.size() != basis.count())
    throw ConfigError("amplitudes", "size does not match the basis");
  stride = std::max(stride, 1);
  const double tau = increments.tau();
  const Eigen::ArrayXd lam = basis.lambdas().array();
  const Eigen::ArrayXd decay = (-lam * tau).exp();
  const Eigen::ArrayXd spread =
      amplitudes.array() * ((1.0 - (-2.0 * lam * tau).exp()) / (2.0 * lam)).sqrt() / std::sqrt(tau);
  ModalTrajectory traj;
  Eigen::ArrayXd y = y0.array();
  const int steps = increments.steps();
  record(traj, 0, tau, y.matrix(), stride, steps);
  for (int step = 0; step < steps; ++step) {
    const auto dW = increments.row(step);
    for (int k = 0; k < basis.count(); ++k)
      y[k] = decay[k] * y[k] + spread[k] * dW[k];
    record(traj, step + 1, tau, y.matrix(), stride, steps);
  }
  return traj;
}

ModalTrajectory ou_euler_path(const SpectralBasis &basis, const ModalVector &y0,
                              const Eigen::VectorXd &amplitudes, const WienerIncrements &increments,
                              int stride) {
  check_increments(basis, increments, basis.count());
  if (amplitudes.size() != basis.count() || y0.size() != basis.count())
    throw ConfigError("amplitudes", "size does not match the basis");
  stride = std::max(stride, 1);
  const double tau = increments.tau();
  const Eigen::ArrayXd implicit = 1.0 / (1.0 + tau * basis.lambdas().array());
  ModalTrajectory traj;
  Eigen::ArrayXd y = y0.array();
  const int steps = increments.steps();
  record(traj, 0, tau, y.matrix(), stride, steps);
  for (int step = 0; step < steps; ++step) {
    const auto dW = increments.row(step);
    for (int k = 0; k < basis.count(); ++k)
      y[k] = implicit[k] * (y[k] + amplitudes[k] * dW[k]);
    record(traj, step + 1, tau, y.matrix(), stride, steps);
  }
  return traj;
}

} // namespace sacfem
