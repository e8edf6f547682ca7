#include "sacfem/verify.hpp"
#include "sacfem/error.hpp"
#include "sacfem/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <tuple>

namespace sacfem {

using std::numbers::pi;

bool OperatorSuiteReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const OperatorRow &r) { return r.pass; });
}

namespace {

std::shared_ptr<const FemSpace> box_space(int n) {
  return std::make_shared<const FemSpace>(
      FemSpace::assemble(std::make_shared<const Mesh>(build_box_mesh(n))));
}

OperatorRow rate_row(std::string name, const std::vector<int> &levels, const std::vector<double> &hs,
                     std::vector<double> values, double lower, double upper) {
  OperatorRow r;
  r.name = std::move(name);
  r.kind = "rate";
  r.levels = levels;
  r.values = std::move(values);
  r.lower = lower;
  r.upper = upper;
  r.measured = fit_rate(hs, r.values).slope;
  r.pass = r.measured >= lower && r.measured <= upper;
  return r;
}

OperatorRow ratio_row(std::string name, const std::vector<int> &levels, std::vector<double> values,
                      double upper) {
  OperatorRow r;
  r.name = std::move(name);
  r.kind = "ratio";
  r.levels = levels;
  r.values = std::move(values);
  const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
  r.measured = *hi / *lo;
  r.lower = 1.0;
  r.upper = upper;
  r.pass = *lo > 0.0 && r.measured <= upper;
  return r;
}

double rough_datum(const Point &x) { return x[0] > 0.5 ? 1.0 : (x[0] < 0.5 ? -1.0 : 0.0); }

/// sup ||v||_inf / ||Delta_h v||_{L2} = max_i ||A^{-1} e_i||_M
double embedding_constant(const FemSpace &space) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  const Eigen::SparseMatrix<double> A = space.stiffness();
  ldlt.compute(A);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("embedding constant factorization", 1.0, 0);
  double best = 0.0;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(space.dof_count());
  for (int i = 0; i < space.dof_count(); ++i) {
    e[i] = 1.0;
    const Eigen::VectorXd g = ldlt.solve(e);
    e[i] = 0.0;
    best = std::max(best, std::sqrt(g.dot(space.mass() * g)));
  }
  return best;
}

} // namespace

OperatorSuiteReport operator_suite(const std::vector<int> &levels) {
  if (levels.size() < 3)
    throw ConfigError("levels", "the operator suite needs at least 3 levels");
  const AnalyticFunction sine = sine_product();
  const double t = 0.1;
  // truncated rough probe and its exact heat evolution
  const SpectralBasis basis(100);
  const ModalVector probe = modal_projection(basis, rough_datum, 64);
  const ModalVector evolved = heat_apply(basis, probe, t);
  auto modal_field = [&basis](const ModalVector &c) {
    return [&basis, c](const Point &x) {
      double v = 0.0;
      for (int n = 0; n < basis.count(); ++n)
        if (c[n] != 0.0)
          v += c[n] * basis.eigenfunction(n, x);
      return v;
    };
  };

  std::vector<double> hs, proj, ritz_l2, ritz_h1, semigroup, semigroup_scaled, inv1, inv2, embed;
  for (int n : levels) {
    const auto space = box_space(n);
    const double h = space->h();
    hs.push_back(h);
    proj.push_back(l2_error(*space, l2_project(*space, sine.value), sine.value));
    const StateVector r = ritz_project(*space, sine);
    ritz_l2.push_back(l2_error(*space, r, sine.value));
    ritz_h1.push_back(h1_seminorm_error(*space, r, sine.gradient));

    const StateVector discrete = discrete_heat(*space, l2_project(*space, modal_field(probe)), t);
    const StateVector projected = l2_project(*space, modal_field(evolved));
    const double diff = l2_norm(*space, discrete - projected);
    semigroup.push_back(diff);
    semigroup_scaled.push_back(diff * t / (h * h));

    const double lmax = max_discrete_eigenvalue(*space);
    inv1.push_back(h * std::sqrt(lmax));
    inv2.push_back(h * h * lmax);
    embed.push_back(embedding_constant(*space));
  }
  OperatorSuiteReport rep;
  rep.rows.push_back(rate_row("l2_projection_rate", levels, hs, proj, 1.8, 2.2));
  rep.rows.push_back(rate_row("ritz_l2_rate", levels, hs, ritz_l2, 1.8, 2.2));
  rep.rows.push_back(rate_row("ritz_h1_rate", levels, hs, ritz_h1, 0.8, 1.2));
  rep.rows.push_back(rate_row("semigroup_difference_rate", levels, hs, semigroup, 1.6, 2.4));
  rep.rows.push_back(ratio_row("semigroup_difference_constant", levels, semigroup_scaled, 3.0));
  rep.rows.push_back(ratio_row("inverse_constant_0_1", levels, inv1, 2.0));
  rep.rows.push_back(ratio_row("inverse_constant_0_2", levels, inv2, 2.0));
  rep.rows.push_back(ratio_row("embedding_constant", levels, embed, 2.0));
  return rep;
}

void write_report_csv(std::ostream &out, const ConvergenceReport &report) {
  out << "n,h,error,se,paths\n";
  out.precision(17);
  for (const auto &r : report.rows)
    out << r.n << ',' << r.h << ',' << r.error << ',' << r.se << ',' << r.paths << '\n';
}

namespace {

/// Meshes, spaces and shared tables for a coupled multilevel run.
struct Hierarchy {
  std::vector<std::shared_ptr<const FemSpace>> spaces; // levels..., reference last
  std::vector<std::shared_ptr<const NoiseQuadrature>> quads;
  std::vector<SparseMatrix> to_reference;              // per level
  std::vector<StateVector> initial;                    // P_h y0 per space
  std::vector<int> ns;
};

Hierarchy build_levels(const ExperimentSettings &s, const Problem &problem) {
  if (s.levels.empty())
    throw ConfigError("levels", "at least one level is required");
  const int base = s.levels.front();
  if (base < 1)
    throw ConfigError("levels", "levels must be positive");
  std::vector<int> ns = s.levels;
  ns.push_back(s.reference);
  int depth = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int ratio = ns[i] / base, d = 0;
    if (ns[i] % base != 0 || (ratio & (ratio - 1)) != 0)
      throw ConfigError(i + 1 == ns.size() ? "reference" : "levels",
                        "every level must be the first level times a power of two");
    while ((1 << d) < ratio)
      ++d;
    if (i > 0 && ns[i] <= ns[i - 1])
      throw ConfigError(i + 1 == ns.size() ? "reference" : "levels",
                        "levels must increase and the reference must be finer than all levels");
    depth = std::max(depth, d);
  }
  const auto meshes = build_hierarchy(base, depth);
  Hierarchy H;
  H.ns = ns;
  const ScalarField y0 = initial_datum(problem);
  for (int n : ns) {
    int d = 0;
    while ((base << d) < n)
      ++d;
    auto space = std::make_shared<const FemSpace>(FemSpace::assemble(meshes[d]));
    H.spaces.push_back(space);
    H.quads.push_back(std::make_shared<const NoiseQuadrature>(space, problem.noise));
    H.initial.push_back(l2_project(*space, y0));
  }
  const Mesh &ref = H.spaces.back()->mesh();
  for (std::size_t l = 0; l + 1 < ns.size(); ++l)
    H.to_reference.push_back(prolongation_matrix(H.spaces[l]->mesh(), ref));
  return H;
}

Problem make_problem(const ExperimentSettings &s) {
  Problem p;
  p.T = s.T;
  p.y0_kind = s.y0;
  p.amplitude = s.amplitude;
  p.noise = std::make_shared<const NoiseModel>(build_noise_model(s.noise));
  p.nonlinearity_on = s.nonlinearity_on;
  p.taming = s.taming;
  return p;
}

int step_count(double T, double tau, const char *key = "tau") {
  if (!(tau > 0.0) || !(T > 0.0))
    throw ConfigError(key, "time step and final time must be positive");
  const double k = T / tau;
  const long K = std::lround(k);
  if (K < 1 || std::abs(k - K) > 1e-9 * k)
    throw ConfigError(key, "tau must divide the final time");
  return static_cast<int>(K);
}

void check_monte_carlo(const ExperimentSettings &s) {
  if (s.paths < 1)
    throw ConfigError("paths", "at least one path is required");
  if (!(s.p >= 1.0))
    throw ConfigError("p", "moment exponent must be >= 1");
  if (!(s.q >= 1.0))
    throw ConfigError("q", "spatial exponent must be >= 1");
  if (s.workers < 1)
    throw ConfigError("workers", "worker count must be positive");
}

/// Runs every path in lockstep over all levels. `observe(path, step, errors)`
/// gets e_l = y_ref - P_l y_l on the reference space for each level.
template <class Observe>
std::vector<std::uint64_t> coupled_paths(const ExperimentSettings &s, const Problem &problem,
                                         const Hierarchy &H, int steps, Observe &&observe) {
  const int levels = static_cast<int>(H.to_reference.size());
  const int columns = problem.noise->columns();
  std::vector<char> flagged(s.paths, 0);
  std::vector<std::uint64_t> seeds(s.paths);
  parallel_for(s.paths, s.workers, [&](int path, int) {
    const std::uint64_t seed = derive_seed(s.seed, static_cast<std::uint64_t>(path));
    seeds[path] = seed;
    std::vector<WienerIncrements> tables;
    tables.push_back(sample_increments(seed, steps, columns, s.tau));
    if (!s.coupled)
      for (int l = 0; l < levels; ++l)
        tables.push_back(sample_increments(derive_seed(seed, l + 1), steps, columns, s.tau));
    auto table_for = [&](int l) -> const WienerIncrements & {
      return s.coupled || l == levels ? tables[0] : tables[l + 1];
    };
    std::vector<std::unique_ptr<TimeStepper>> steppers;
    std::vector<StateVector> y;
    for (int l = 0; l <= levels; ++l) {
      steppers.push_back(
          std::make_unique<TimeStepper>(H.spaces[l], H.quads[l], problem, s.tau, s.scheme));
      y.push_back(H.initial[l]);
    }
    std::vector<StateVector> errors(levels);
    auto measure = [&](int step) {
      for (int l = 0; l < levels; ++l)
        errors[l] = y[levels] - H.to_reference[l] * y[l];
      observe(path, step, errors);
    };
    try {
      measure(0);
      for (int k = 0; k < steps; ++k) {
        for (int l = 0; l <= levels; ++l)
          y[l] = steppers[l]->step(y[l], table_for(l).row(k), k + 1, seed);
        measure(k + 1);
      }
    } catch (const PathError &) {
      flagged[path] = 1;
    }
  });
  std::vector<std::uint64_t> out;
  for (int i = 0; i < s.paths; ++i)
    if (flagged[i])
      out.push_back(seeds[i]);
  return out;
}

ConvergenceReport make_report(std::string name, std::string norm, const Hierarchy &H,
                              std::vector<std::vector<double>> samples,
                              const std::vector<char> &flagged, double p) {
  ConvergenceReport r;
  r.name = std::move(name);
  r.norm = std::move(norm);
  const int levels = static_cast<int>(samples.size());
  std::vector<std::vector<double>> kept(levels);
  for (int l = 0; l < levels; ++l)
    for (std::size_t i = 0; i < samples[l].size(); ++i)
      if (!flagged[i])
        kept[l].push_back(samples[l][i]);
  r.flagged = static_cast<int>(std::count(flagged.begin(), flagged.end(), 1));
  r.valid = r.flagged == 0;
  std::vector<double> hs, errs;
  bool positive = true;
  for (int l = 0; l < levels; ++l) {
    LevelError e;
    e.n = H.ns[l];
    e.h = H.spaces[l]->h();
    e.paths = static_cast<int>(kept[l].size());
    if (!kept[l].empty()) {
      const auto est = mc_lp_norm(kept[l], p);
      e.error = est.estimate;
      e.se = est.standard_error;
    }
    positive = positive && e.error > 0.0;
    r.rows.push_back(e);
    hs.push_back(e.h);
    errs.push_back(e.error);
  }
  if (levels >= 3 && positive && !kept[0].empty()) {
    r.fit = fit_rate(hs, errs);
    std::tie(r.ci_lower, r.ci_upper) = bootstrap_rate_ci(hs, kept, p);
  } else if (levels < 3 || !positive) {
    r.valid = false;
  }
  r.samples = std::move(kept);
  return r;
}

std::vector<char> flag_mask(const ExperimentSettings &s, const std::vector<std::uint64_t> &seeds) {
  std::vector<char> m(s.paths, 0);
  for (int i = 0; i < s.paths; ++i) {
    const std::uint64_t seed = derive_seed(s.seed, static_cast<std::uint64_t>(i));
    m[i] = std::find(seeds.begin(), seeds.end(), seed) != seeds.end();
  }
  return m;
}

} // namespace

SmoothResult converge_smooth(const ExperimentSettings &s) {
  check_monte_carlo(s);
  const Problem problem = make_problem(s);
  const int steps = step_count(s.T, s.tau);
  const Hierarchy H = build_levels(s, problem);
  const int levels = static_cast<int>(H.to_reference.size());
  const FemSpace &ref = *H.spaces.back();
  const double p = s.p, q = s.q;

  using Grid = std::vector<std::vector<double>>;
  Grid integral(levels, std::vector<double>(s.paths, 0.0));
  Grid uniform(levels, std::vector<double>(s.paths, 0.0));
  Grid final_l2(levels, std::vector<double>(s.paths, 0.0));
  const auto flagged = coupled_paths(s, problem, H, steps, [&](int path, int step, const auto &e) {
    const double w = (step == 0 || step == steps) ? 0.5 * s.tau : s.tau;
    for (int l = 0; l < levels; ++l) {
      integral[l][path] += w * std::pow(lq_norm(ref, e[l], q), p);
      uniform[l][path] = std::max(uniform[l][path], e[l].cwiseAbs().maxCoeff());
      if (step == steps)
        final_l2[l][path] = l2_norm(ref, e[l]);
    }
  });
  for (auto &row : integral)
    for (double &v : row)
      v = std::pow(v, 1.0 / p);
  const auto mask = flag_mask(s, flagged);

  SmoothResult out;
  out.flagged_seeds = flagged;
  int decreasing = 0, pairs = 0;
  for (int path = 0; path < s.paths; ++path) {
    if (mask[path])
      continue;
    for (int l = 0; l + 1 < levels; ++l) {
      ++pairs;
      decreasing += integral[l + 1][path] < integral[l][path];
    }
  }
  out.monotone_fraction = pairs ? static_cast<double>(decreasing) / pairs : 0.0;
  out.space_time = make_report("smooth_space_time", "L^p(Omega x (0,T); L^q)", H, std::move(integral), mask, p);
  out.uniform = make_report("smooth_uniform", "L^p(Omega; C([0,T]; L^inf))", H, std::move(uniform), mask, p);
  out.final_time = make_report("smooth_final", "L^p(Omega; L^2) at T", H, std::move(final_l2), mask, p);
  return out;
}

RoughResult converge_rough(const ExperimentSettings &s) {
  check_monte_carlo(s);
  const Problem problem = make_problem(s);
  const int steps = step_count(s.T, s.tau);
  const int k_star = step_count(s.t_star, s.tau, "t_star");
  const int k_probe = step_count(s.t_probe, s.tau, "t_probe");
  if (k_star > steps || k_probe > steps)
    throw ConfigError("t_star", "evaluation times must not exceed T");
  const Hierarchy H = build_levels(s, problem);
  const int levels = static_cast<int>(H.to_reference.size());
  const FemSpace &ref = *H.spaces.back();

  std::vector<std::vector<double>> at_star(levels, std::vector<double>(s.paths, 0.0));
  auto at_probe = at_star;
  const auto flagged = coupled_paths(s, problem, H, steps, [&](int path, int step, const auto &e) {
    if (step != k_star && step != k_probe)
      return;
    for (int l = 0; l < levels; ++l) {
      const double v = l2_norm(ref, e[l]);
      if (step == k_star)
        at_star[l][path] = v;
      if (step == k_probe)
        at_probe[l][path] = v;
    }
  });
  const auto mask = flag_mask(s, flagged);
  RoughResult out;
  out.flagged_seeds = flagged;
  out.at_t_star = make_report("rough_t_star", "L^p(Omega; L^2) at t*", H, std::move(at_star), mask, s.p);
  out.at_probe = make_report("rough_t_probe", "L^p(Omega; L^2) at the probe time", H, std::move(at_probe), mask, s.p);
  const double finest_star = out.at_t_star.rows.back().error;
  out.probe_ratio = finest_star > 0.0 ? out.at_probe.rows.back().error / finest_star : 0.0;
  out.probe_bound = std::pow(s.t_star / s.t_probe, 1.0 / s.p) * 3.0;
  return out;
}

namespace {

/// Per-path sup_t ||y_h(t)||_{L^q} on a single level.
std::vector<double> sup_norms(const ExperimentSettings &s, const Problem &problem,
                              const std::shared_ptr<const FemSpace> &space, int paths, int steps,
                              int &flagged) {
  const auto quad = std::make_shared<const NoiseQuadrature>(space, problem.noise);
  const StateVector y0 = l2_project(*space, initial_datum(problem));
  std::vector<double> out(paths, 0.0);
  std::vector<char> bad(paths, 0);
  parallel_for(paths, s.workers, [&](int path, int) {
    const std::uint64_t seed = derive_seed(s.seed, static_cast<std::uint64_t>(path));
    const auto inc = sample_increments(seed, steps, problem.noise->columns(), s.tau);
    TimeStepper stepper(space, quad, problem, s.tau, s.scheme);
    StateVector y = y0;
    double sup = lq_norm(*space, y, s.q);
    try {
      for (int k = 0; k < steps; ++k) {
        y = stepper.step(y, inc.row(k), k + 1, seed);
        sup = std::max(sup, lq_norm(*space, y, s.q));
      }
    } catch (const PathError &) {
      bad[path] = 1;
    }
    out[path] = sup;
  });
  flagged += static_cast<int>(std::count(bad.begin(), bad.end(), 1));
  return out;
}

} // namespace

MomentReport moment_check(const ExperimentSettings &s) {
  check_monte_carlo(s);
  if (s.paths < 2)
    throw ConfigError("paths", "moment check needs at least 2 paths");
  const int steps = step_count(s.T, s.tau);
  const int n = s.levels.empty() ? 8 : s.levels.front();
  const auto space = box_space(n);
  MomentReport r;

  const Problem base = make_problem(s);
  const auto full = sup_norms(s, base, space, s.paths, steps, r.flagged);
  const int half = s.paths / 2;
  ExperimentSettings wide = s;
  wide.noise.modes = 2 * s.noise.modes;
  const auto doubled = sup_norms(wide, make_problem(wide), space, s.paths, steps, r.flagged);

  auto estimate = [&](std::string label, std::vector<double> samples, int modes) {
    MomentEstimate m;
    m.label = std::move(label);
    m.paths = static_cast<int>(samples.size());
    m.modes = modes;
    m.value = mc_lp_norm(samples, s.p);
    m.samples = std::move(samples);
    return m;
  };
  r.half_paths = estimate("half_paths", std::vector<double>(full.begin(), full.begin() + half), s.noise.modes);
  r.full_paths = estimate("full_paths", full, s.noise.modes);
  r.doubled_modes = estimate("doubled_modes", doubled, wide.noise.modes);
  r.finite = std::isfinite(r.half_paths.value.estimate) && std::isfinite(r.full_paths.value.estimate) &&
             std::isfinite(r.doubled_modes.value.estimate);
  const double se_paths =
      std::max(r.half_paths.value.standard_error, r.full_paths.value.standard_error);
  r.paths_stable = std::abs(r.full_paths.value.estimate - r.half_paths.value.estimate) <= 2.0 * se_paths;
  const double se_modes =
      std::max(r.full_paths.value.standard_error, r.doubled_modes.value.standard_error);
  r.modes_stable =
      std::abs(r.doubled_modes.value.estimate - r.full_paths.value.estimate) <= 2.0 * se_modes;

  ExperimentSettings quiet = s;
  quiet.noise.sigma = SigmaKind::zero;
  quiet.y0 = InitialKind::smooth;
  quiet.amplitude = kEnvelopeAmplitude;
  quiet.paths = 1;
  const Problem qp = make_problem(quiet);
  int ignored = 0;
  r.deterministic_sup = sup_norms(quiet, qp, space, 1, steps, ignored).front();
  r.flagged += ignored;
  r.deterministic_bound = std::exp(s.T) * lq_norm(*space, l2_project(*space, initial_datum(qp)), s.q);
  r.envelope_holds = r.deterministic_sup <= r.deterministic_bound * (1.0 + 1e-12);
  return r;
}

OuReport ou_validation(const ExperimentSettings &s, const std::vector<double> &taus) {
  check_monte_carlo(s);
  if (taus.size() < 3)
    throw ConfigError("taus", "at least 3 step sizes are required");
  const double tau_min = *std::min_element(taus.begin(), taus.end());
  const double ref_tau = tau_min / 4.0;
  const int ref_steps = step_count(s.T, ref_tau, "taus");
  std::vector<int> factors;
  for (double tau : taus) {
    const double f = tau / ref_tau;
    const long F = std::lround(f);
    if (std::abs(f - F) > 1e-9 * f || ref_steps % F != 0)
      throw ConfigError("taus", "every step must be a multiple of min(taus)/4 dividing T");
    factors.push_back(static_cast<int>(F));
  }
  const NoiseModel noise = build_noise_model(s.noise);
  const SpectralBasis &basis = noise.basis();
  const Eigen::VectorXd a = noise.amplitudes();
  const ModalVector y0 = ModalVector::Zero(basis.count());

  std::vector<std::vector<double>> err(taus.size(), std::vector<double>(s.paths, 0.0));
  parallel_for(s.paths, s.workers, [&](int path, int) {
    const auto fine = sample_increments(derive_seed(s.seed, static_cast<std::uint64_t>(path)),
                                        ref_steps, basis.count(), ref_tau);
    const ModalVector ref = exact_ou_path(basis, y0, a, fine, ref_steps).states.back();
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const auto coarse = fine.coarsen(factors[i]);
      const ModalVector e = ou_euler_path(basis, y0, a, coarse, coarse.steps()).states.back();
      err[i][path] = (e - ref).norm();
    }
  });
  OuReport r;
  r.reference_tau = ref_tau;
  std::vector<double> errors;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    r.rows.push_back({taus[i], mc_lp_norm(err[i], 2.0)});
    errors.push_back(r.rows.back().error.estimate);
  }
  r.fit = fit_rate(taus, errors);
  r.pass = std::abs(r.fit.slope - 1.0) <= 0.3;
  return r;
}

NoiseValidation validate_noise(const NoiseOptions &opt, int n, int trials, std::uint64_t seed) {
  NoiseValidation v;
  const NoiseModel noise = build_noise_model(opt);
  v.conditions = certify_conditions(noise);
  v.trials = trials;
  const auto space = box_space(n);
  const double C = noise.cf_estimate();
  double sup_e2 = 8.0 * noise.amplitudes().squaredNorm();
  if (opt.violate_boundary)
    sup_e2 += noise.amplitudes()[0] * noise.amplitudes()[0];
  const double L = noise.sigma_lipschitz() * std::sqrt(sup_e2);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  auto random = [&]() {
    StateVector y(space->dof_count());
    const double a = scale(gen);
    for (auto &x : y)
      x = a * normal(gen);
    return y;
  };
  for (int i = 0; i < trials; ++i) {
    const StateVector u = random(), w = random();
    v.worst_growth_ratio =
        std::max(v.worst_growth_ratio, hs_norm_F(noise, *space, u) / (std::sqrt(C) * (1.0 + l2_norm(*space, u))));
    const double d = l2_norm(*space, u - w);
    const double hs = hs_norm_F_difference(noise, *space, u, w);
    if (L > 0.0 && d > 0.0)
      v.worst_lipschitz_ratio = std::max(v.worst_lipschitz_ratio, hs / (L * d));
    else if (hs > 0.0)
      v.worst_lipschitz_ratio = std::numeric_limits<double>::infinity();
  }
  v.growth_holds = v.worst_growth_ratio <= 1.0;
  v.lipschitz_holds = v.worst_lipschitz_ratio <= 1.05;
  return v;
}

} // namespace sacfem
