#include "sacfem/noise.hpp"
#include "sacfem/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <unordered_map>

namespace sacfem {

using std::numbers::pi;

namespace {

const double kNorm = 2.0 * std::numbers::sqrt2;

} // namespace

SigmaKind parse_sigma_kind(const std::string &name) {
  if (name == "sqrt1py2")
    return SigmaKind::sqrt1py2;
  if (name == "tanh-bounded" || name == "tanh_bounded")
    return SigmaKind::tanh_bounded;
  if (name == "zero")
    return SigmaKind::zero;
  if (name == "constant")
    return SigmaKind::constant;
  throw ConfigError("noise.sigma_kind",
                    "unknown kind '" + name + "' (expected sqrt1py2, tanh-bounded, zero, constant)");
}

std::string to_string(SigmaKind kind) {
  switch (kind) {
  case SigmaKind::sqrt1py2:
    return "sqrt1py2";
  case SigmaKind::tanh_bounded:
    return "tanh-bounded";
  case SigmaKind::zero:
    return "zero";
  case SigmaKind::constant:
    return "constant";
  }
  return "?";
}

NoiseModel::NoiseModel(const NoiseOptions &opt)
    : opt_(opt), basis_(std::make_shared<const SpectralBasis>(opt.modes)) {
  amplitudes_ = basis_->lambdas().array().pow(-opt.rho).matrix();
  for (int n = 0; n < opt.modes; ++n)
    cf_estimate_ += amplitudes_[n] * amplitudes_[n] * 8.0 * (1.0 + basis_->lambda(n));
  if (opt.violate_boundary)
    cf_estimate_ += amplitudes_[0] * amplitudes_[0];
}

double NoiseModel::sigma(double y) const {
  switch (opt_.sigma) {
  case SigmaKind::sqrt1py2:
    return std::sqrt(1.0 + y * y);
  case SigmaKind::tanh_bounded:
    return 1.0 + 0.5 * std::tanh(y);
  case SigmaKind::zero:
    return 0.0;
  case SigmaKind::constant:
    return 1.0;
  }
  return 0.0;
}

double NoiseModel::sigma_derivative(double y) const {
  switch (opt_.sigma) {
  case SigmaKind::sqrt1py2:
    return y / std::sqrt(1.0 + y * y);
  case SigmaKind::tanh_bounded: {
    const double c = std::cosh(y);
    return 0.5 / (c * c);
  }
  case SigmaKind::zero:
  case SigmaKind::constant:
    return 0.0;
  }
  return 0.0;
}

double NoiseModel::sigma_lipschitz() const {
  switch (opt_.sigma) {
  case SigmaKind::sqrt1py2:
    return 1.0;
  case SigmaKind::tanh_bounded:
    return 0.5;
  case SigmaKind::zero:
  case SigmaKind::constant:
    return 0.0;
  }
  return 0.0;
}

double NoiseModel::field(const Point &x, std::span<const double> dW) const {
  double v = 0.0;
  for (int n = 0; n < opt_.modes; ++n)
    v += dW[n] * amplitudes_[n] * basis_->eigenfunction(n, x);
  if (opt_.violate_boundary)
    v += dW[opt_.modes] * amplitudes_[0];
  return v;
}

NoiseModel build_noise_model(const NoiseOptions &opt) {
  if (!(opt.rho > kMinimumRho))
    throw ConfigError("noise.rho",
                      "decay exponent must exceed 5/4: with lambda_n ~ n^{2/3} the gradient sum "
                      "sum a_n^2 lambda_n ~ sum n^{(2/3)(1 - 2 rho)} diverges otherwise");
  if (opt.modes < 1)
    throw ConfigError("noise.N", "truncation must be at least 1");
  return NoiseModel(opt);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) + index);
}

WienerIncrements::WienerIncrements(std::uint64_t seed, int steps, int columns, double tau,
                                   std::vector<double> table)
    : seed_(seed), steps_(steps), columns_(columns), tau_(tau), table_(std::move(table)) {
  if (steps < 1 || columns < 1)
    throw ConfigError("increments", "need at least one step and one column");
  if (!(tau > 0.0))
    throw ConfigError("tau", "time step must be positive");
  if (table_.size() != static_cast<std::size_t>(steps) * columns)
    throw ConfigError("increments", "table size does not match steps x columns");
}

WienerIncrements WienerIncrements::coarsen(int factor) const {
  if (factor < 1 || steps_ % factor != 0)
    throw ConfigError("tau", "coarsening factor must divide the step count");
  const int steps = steps_ / factor;
  std::vector<double> t(static_cast<std::size_t>(steps) * columns_, 0.0);
  for (int s = 0; s < steps_; ++s) {
    const auto r = row(s);
    double *out = &t[static_cast<std::size_t>(s / factor) * columns_];
    for (int c = 0; c < columns_; ++c)
      out[c] += r[c];
  }
  return WienerIncrements(seed_, steps, columns_, tau_ * factor, std::move(t));
}

namespace {

void put_u64(std::ostream &out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char *>(b), 8);
}

std::uint64_t get_u64(std::istream &in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char *>(b), 8))
    throw Error("increment file is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

} // namespace

void WienerIncrements::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write " + path.string());
  put_u64(out, seed_);
  put_u64(out, static_cast<std::uint64_t>(steps_));
  put_u64(out, static_cast<std::uint64_t>(columns_));
  put_u64(out, std::bit_cast<std::uint64_t>(tau_));
  for (double v : table_)
    put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out)
    throw Error("write failed for " + path.string());
}

WienerIncrements WienerIncrements::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot read " + path.string());
  const std::uint64_t seed = get_u64(in);
  const auto steps = static_cast<std::int64_t>(get_u64(in));
  const auto columns = static_cast<std::int64_t>(get_u64(in));
  const double tau = std::bit_cast<double>(get_u64(in));
  if (steps < 1 || columns < 1 || steps * columns > (std::int64_t{1} << 34))
    throw Error("increment file header is invalid: " + path.string());
  std::vector<double> table(static_cast<std::size_t>(steps * columns));
  for (double &v : table)
    v = std::bit_cast<double>(get_u64(in));
  return WienerIncrements(seed, static_cast<int>(steps), static_cast<int>(columns), tau,
                          std::move(table));
}

WienerIncrements sample_increments(std::uint64_t seed, int steps, int columns, double tau) {
  if (steps < 1 || columns < 1)
    throw ConfigError("increments", "need at least one step and one column");
  if (!(tau > 0.0))
    throw ConfigError("tau", "time step must be positive");
  std::vector<double> table(static_cast<std::size_t>(steps) * columns);
  const double scale = std::sqrt(tau);
  for (int c = 0; c < columns; ++c) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> normal;
    for (int s = 0; s < steps; ++s)
      table[static_cast<std::size_t>(s) * columns + c] = scale * normal(rng);
  }
  return WienerIncrements(seed, steps, columns, tau, std::move(table));
}

namespace {

// Coordinates of quadrature points computed from different tets agree up
// to rounding; snap them onto a 2^-44 lattice to deduplicate.
std::int64_t coordinate_key(double x) { return std::llround(std::ldexp(x, 44)); }

int intern(std::unordered_map<std::int64_t, int> &index, std::vector<double> &values, double x) {
  auto [it, inserted] = index.try_emplace(coordinate_key(x), static_cast<int>(values.size()));
  if (inserted)
    values.push_back(x);
  return it->second;
}

std::vector<double> sine_table(const std::vector<double> &xs, int kmax) {
  std::vector<double> s(xs.size() * kmax);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int k = 1; k <= kmax; ++k)
      s[i * kmax + k - 1] = std::sin(k * pi * xs[i]);
  return s;
}

} // namespace

NoiseQuadrature::NoiseQuadrature(std::shared_ptr<const FemSpace> space_ptr,
                                 std::shared_ptr<const NoiseModel> noise_ptr)
    : space_(std::move(space_ptr)), noise_(std::move(noise_ptr)),
      points_per_tet_(static_cast<int>(space_->rule().points.size())),
      kmax_(noise_->basis().max_index()) {
  const FemSpace &space = *space_;
  const int tets = space.mesh().tet_count();
  const std::size_t nq = static_cast<std::size_t>(tets) * points_per_tet_;
  std::unordered_map<std::int64_t, int> ix, iy, iz;
  std::unordered_map<std::uint64_t, int> ipair;
  std::vector<double> xs, ys, zs;
  point_x_.resize(nq);
  point_pair_.resize(nq);
  for (int t = 0; t < tets; ++t)
    for (int q = 0; q < points_per_tet_; ++q) {
      const Point p = space.quadrature_point(t, q);
      const std::size_t i = static_cast<std::size_t>(t) * points_per_tet_ + q;
      point_x_[i] = intern(ix, xs, p[0]);
      const int a = intern(iy, ys, p[1]);
      const int b = intern(iz, zs, p[2]);
      const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto [it, inserted] = ipair.try_emplace(key, static_cast<int>(pairs_.size()));
      if (inserted)
        pairs_.push_back({a, b});
      point_pair_[i] = it->second;
    }
  sin_x_ = sine_table(xs, kmax_);
  sin_y_ = sine_table(ys, kmax_);
  sin_z_ = sine_table(zs, kmax_);
  ny_ = static_cast<int>(ys.size());
  nz_ = static_cast<int>(zs.size());
}

void NoiseQuadrature::field(std::span<const double> dW, std::vector<double> &out) const {
  const NoiseModel &noise = *noise_;
  const int K = kmax_;
  const std::size_t nq = point_x_.size();
  out.resize(nq);
  std::vector<double> C(static_cast<std::size_t>(K) * K * K, 0.0);
  for (int n = 0; n < noise.modes(); ++n) {
    const Mode &k = noise.basis().modes()[n];
    C[((k[0] - 1) * K + (k[1] - 1)) * K + (k[2] - 1)] = kNorm * noise.amplitudes()[n] * dW[n];
  }
  const double shift = noise.options().violate_boundary ? noise.amplitudes()[0] * dW[noise.modes()] : 0.0;
  // T[k1][k2][z] = sum_k3 C[k1][k2][k3] sin(k3 pi z)
  std::vector<double> T(static_cast<std::size_t>(K) * K * nz_, 0.0);
  for (int k12 = 0; k12 < K * K; ++k12)
    for (int k3 = 0; k3 < K; ++k3) {
      const double c = C[k12 * K + k3];
      if (c == 0.0)
        continue;
      double *t = &T[static_cast<std::size_t>(k12) * nz_];
      for (int z = 0; z < nz_; ++z)
        t[z] += c * sin_z_[static_cast<std::size_t>(z) * K + k3];
    }
  // P[pair][k1] = sum_k2 sin(k2 pi y) T[k1][k2][z]
  std::vector<double> P(pairs_.size() * K);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const double *sy = &sin_y_[static_cast<std::size_t>(pairs_[p][0]) * K];
    const int z = pairs_[p][1];
    for (int k1 = 0; k1 < K; ++k1) {
      double acc = 0.0;
      for (int k2 = 0; k2 < K; ++k2)
        acc += sy[k2] * T[static_cast<std::size_t>(k1 * K + k2) * nz_ + z];
      P[p * K + k1] = acc;
    }
  }
  for (std::size_t i = 0; i < nq; ++i) {
    const double *sx = &sin_x_[static_cast<std::size_t>(point_x_[i]) * K];
    const double *pp = &P[static_cast<std::size_t>(point_pair_[i]) * K];
    double acc = shift;
    for (int k1 = 0; k1 < K; ++k1)
      acc += sx[k1] * pp[k1];
    out[i] = acc;
  }
}

void assemble_loads(const NoiseQuadrature &quad, const StateVector &y, std::span<const double> dW,
                    Eigen::VectorXd *cubic, Eigen::VectorXd *diffusion, LoadWorkspace &ws) {
  const FemSpace &space = quad.space();
  const NoiseModel &noise = quad.noise();
  const QuadratureRule &rule = space.rule();
  const int nq = quad.points_per_tet();
  const bool want_noise = diffusion != nullptr && noise.active();
  if (cubic)
    cubic->setZero(space.dof_count());
  if (diffusion)
    diffusion->setZero(space.dof_count());
  if (!cubic && !want_noise)
    return;
  if (want_noise)
    quad.field(dW, ws.field);
  const auto &dofs = space.tet_dofs();
  const auto &vols = space.volumes();
  for (int t = 0; t < space.mesh().tet_count(); ++t) {
    const auto &d = dofs[t];
    double yv[4];
    for (int a = 0; a < 4; ++a)
      yv[a] = d[a] < 0 ? 0.0 : y[d[a]];
    double lc[4] = {0, 0, 0, 0}, ld[4] = {0, 0, 0, 0};
    const double *xi = want_noise ? &ws.field[static_cast<std::size_t>(t) * nq] : nullptr;
    for (int q = 0; q < nq; ++q) {
      const auto &b = rule.points[q];
      const double yq = b[0] * yv[0] + b[1] * yv[1] + b[2] * yv[2] + b[3] * yv[3];
      const double w = vols[t] * rule.weights[q];
      if (cubic) {
        const double c = w * yq * yq * yq;
        for (int a = 0; a < 4; ++a)
          lc[a] += c * b[a];
      }
      if (want_noise) {
        const double g = w * noise.sigma(yq) * xi[q];
        for (int a = 0; a < 4; ++a)
          ld[a] += g * b[a];
      }
    }
    for (int a = 0; a < 4; ++a) {
      if (d[a] < 0)
        continue;
      if (cubic)
        (*cubic)[d[a]] += lc[a];
      if (want_noise)
        (*diffusion)[d[a]] += ld[a];
    }
  }
}

Eigen::VectorXd diffusion_load(const FemSpace &space, const NoiseModel &noise, const StateVector &y,
                               std::span<const double> dW) {
  if (static_cast<int>(dW.size()) < noise.columns())
    throw ConfigError("noise.N", "increment row is shorter than the number of noise columns");
  // non-owning handles; the quadrature does not outlive this call
  const NoiseQuadrature quad(std::shared_ptr<const FemSpace>(&space, [](const FemSpace *) {}),
                             std::shared_ptr<const NoiseModel>(&noise, [](const NoiseModel *) {}));
  LoadWorkspace ws;
  Eigen::VectorXd g;
  assemble_loads(quad, y, dW, nullptr, &g, ws);
  return g;
}

namespace {

void require_q2(double q) {
  if (q != 2.0)
    throw ConfigError("q", "only the Hilbert-Schmidt case q = 2 is supported for the noise norm");
}

// sum_n a_n^2 e_n(x)^2 (+ the constant mode)
double weight_sum(const NoiseModel &noise, const Point &x) {
  double s = 0.0;
  for (int n = 0; n < noise.modes(); ++n) {
    const double v = noise.amplitudes()[n] * noise.basis().eigenfunction(n, x);
    s += v * v;
  }
  if (noise.options().violate_boundary)
    s += noise.amplitudes()[0] * noise.amplitudes()[0];
  return s;
}

template <class G>
double hs_quadrature(const NoiseModel &noise, const FemSpace &space, G &&integrand) {
  const QuadratureRule &rule = space.rule();
  double acc = 0.0;
  for (int t = 0; t < space.mesh().tet_count(); ++t) {
    const auto &d = space.tet_dofs()[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = space.quadrature_point(t, static_cast<int>(q));
      acc += space.volumes()[t] * rule.weights[q] * integrand(d, rule.points[q]) *
             weight_sum(noise, x);
    }
  }
  return std::sqrt(acc);
}

double eval(const StateVector &y, const std::array<int, 4> &d, const std::array<double, 4> &b) {
  double v = 0.0;
  for (int a = 0; a < 4; ++a)
    if (d[a] >= 0)
      v += b[a] * y[d[a]];
  return v;
}

} // namespace

double hs_norm_F(const NoiseModel &noise, const FemSpace &space, const StateVector &y, double q) {
  require_q2(q);
  return hs_quadrature(noise, space, [&](const auto &d, const auto &b) {
    const double s = noise.sigma(eval(y, d, b));
    return s * s;
  });
}

double hs_norm_F_difference(const NoiseModel &noise, const FemSpace &space, const StateVector &u,
                            const StateVector &v, double q) {
  require_q2(q);
  return hs_quadrature(noise, space, [&](const auto &d, const auto &b) {
    const double s = noise.sigma(eval(u, d, b)) - noise.sigma(eval(v, d, b));
    return s * s;
  });
}

double hs_norm_F(const NoiseModel &noise, const ModalVector &y, double q) {
  require_q2(q);
  // y lives on the noise basis truncation or any basis of the same size
  const SpectralBasis basis(static_cast<int>(y.size()));
  const CollocationGrid grid(std::max({basis.max_index(), noise.basis().max_index(), 16}));
  const std::vector<double> u = grid.synthesize(basis, y);
  const int P = grid.points();
  double acc = 0.0;
  std::size_t i = 0;
  for (int j3 = 0; j3 < P; ++j3)
    for (int j2 = 0; j2 < P; ++j2)
      for (int j1 = 0; j1 < P; ++j1, ++i) {
        const double s = noise.sigma(u[i]);
        acc += s * s * weight_sum(noise, {grid.node(j1), grid.node(j2), grid.node(j3)});
      }
  return std::sqrt(acc / std::pow(P + 1.0, 3));
}

namespace {

ConditionEntry condition(std::string name, const std::vector<double> &terms, double tol,
                         bool must_vanish) {
  ConditionEntry e;
  e.name = std::move(name);
  double s = 0.0;
  for (double t : terms) {
    s += t;
    e.partial_sums.push_back(s);
  }
  e.total = s;
  const std::size_t half = terms.size() / 2;
  const double head = half == 0 ? 0.0 : e.partial_sums[half - 1];
  e.tail_fraction = s > 0.0 ? (s - head) / s : 0.0;
  e.pass = e.tail_fraction <= tol && std::isfinite(s) && (!must_vanish || s == 0.0);
  return e;
}

} // namespace

ConditionReport certify_conditions(const NoiseModel &noise, double tail_tolerance) {
  const int N = noise.modes();
  const double sigma0 = noise.sigma(0.0);
  const double lip = noise.sigma_lipschitz();
  std::vector<double> boundary(N, 0.0), growth(N), lipschitz(N);
  for (int n = 0; n < N; ++n) {
    const double a2 = noise.amplitudes()[n] * noise.amplitudes()[n];
    growth[n] = a2 * (8.0 + 8.0 * noise.basis().lambda(n));
    lipschitz[n] = lip * lip * a2 * 8.0;
  }
  if (noise.options().violate_boundary) {
    const double a2 = noise.amplitudes()[0] * noise.amplitudes()[0];
    boundary.push_back(sigma0 * sigma0 * a2);
    growth.push_back(a2);
    lipschitz.push_back(lip * lip * a2);
  }
  ConditionReport r;
  r.tail_tolerance = tail_tolerance;
  r.boundary = condition("boundary", boundary, tail_tolerance, true);
  r.growth = condition("growth", growth, tail_tolerance, false);
  r.lipschitz = condition("lipschitz", lipschitz, tail_tolerance, false);
  r.cf_estimate = noise.cf_estimate();
  return r;
}

} // namespace sacfem
