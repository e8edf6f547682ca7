#pragma once

#include "sacfem/integrate.hpp"
#include "sacfem/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sacfem {

/// One line of the operator table: per-level values, the measured
/// quantity (a fitted rate or a max/min constant ratio) and its window.
struct OperatorRow {
  std::string name;
  std::string kind; // "rate" or "ratio"
  std::vector<int> levels;
  std::vector<double> values;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct OperatorSuiteReport {
  std::vector<OperatorRow> rows;
  bool pass() const;
};

OperatorSuiteReport operator_suite(const std::vector<int> &levels = {4, 8, 16});

/// Shared parameters of the Monte Carlo drivers.
struct ExperimentSettings {
  std::vector<int> levels{4, 8, 16};
  int reference = 32;
  int paths = 32;
  double p = 4.0;
  double q = 4.0;
  double tau = 2.5e-4;
  double T = 0.25;
  double t_star = 0.25;
  double t_probe = 0.0625;
  NoiseOptions noise;
  std::uint64_t seed = 20240601;
  Scheme scheme = Scheme::semi_implicit;
  InitialKind y0 = InitialKind::smooth;
  double amplitude = 1.0;
  bool nonlinearity_on = true;
  bool taming = false;
  /// Independent noise per level instead of common random numbers.
  bool coupled = true;
  int workers = 1;
};

struct LevelError {
  int n = 0;
  double h = 0.0;
  double error = 0.0;
  double se = 0.0;
  int paths = 0;
};

struct ConvergenceReport {
  std::string name;
  std::string norm;
  std::vector<LevelError> rows;
  RateFit fit;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  int flagged = 0;
  bool valid = true;
  std::vector<std::vector<double>> samples; // [level][path]
};

/// CSV with columns n, h, error, se, paths.
void write_report_csv(std::ostream &out, const ConvergenceReport &report);

struct SmoothResult {
  ConvergenceReport space_time;  // L^p(Omega x (0,T); L^q)
  ConvergenceReport uniform;     // L^p(Omega; C([0,T]; L^inf)), nodal
  ConvergenceReport final_time;  // L^p(Omega; L^2) at T
  double monotone_fraction = 0.0;
  std::vector<std::uint64_t> flagged_seeds;
};

struct RoughResult {
  ConvergenceReport at_t_star;
  ConvergenceReport at_probe;
  double probe_ratio = 0.0;   // finest-level error at t_probe / at t_star
  double probe_bound = 0.0;   // (t_star / t_probe)^{1/p} * 3
  std::vector<std::uint64_t> flagged_seeds;
};

/// Coupled levels plus the reference, all driven by the same increments and
/// the same tau. Errors are measured on the reference mesh after prolongation.
SmoothResult converge_smooth(const ExperimentSettings &s);
RoughResult converge_rough(const ExperimentSettings &s);

struct MomentEstimate {
  std::string label;
  int paths = 0;
  int modes = 0;
  MonteCarloEstimate value;
  std::vector<double> samples;
};

struct MomentReport {
  MomentEstimate half_paths, full_paths, doubled_modes;
  double deterministic_sup = 0.0;   // sigma = zero run
  double deterministic_bound = 0.0; // e^T ||y0||_{L^q}
  int flagged = 0;
  bool finite = true;
  bool paths_stable = false;
  bool modes_stable = false;
  bool envelope_holds = false;
  bool pass() const { return finite && paths_stable && modes_stable && envelope_holds && flagged == 0; }
};

inline constexpr double kEnvelopeAmplitude = 0.5;

/// E[sup_t ||y_h(t)||_{L^q}^p]^{1/p} on the first level of `s.levels`, with
/// stability under halving the paths and doubling the noise modes. The
/// deterministic envelope uses sigma = zero and the smooth datum with
/// amplitude kEnvelopeAmplitude.
MomentReport moment_check(const ExperimentSettings &s);

struct OuRow {
  double tau = 0.0;
  MonteCarloEstimate error;
};

struct OuReport {
  std::vector<OuRow> rows;
  RateFit fit;
  double reference_tau = 0.0;
  bool pass = false;
};

/// Additive linear case on the spectral basis of the noise: linear-implicit
/// Euler at each tau against the exact OU recursion at min(tau)/4, all on one
/// Brownian path per sample. Error: L^2(Omega; L^2) at T.
OuReport ou_validation(const ExperimentSettings &s, const std::vector<double> &taus);

struct NoiseValidation {
  ConditionReport conditions;
  int trials = 0;
  double worst_growth_ratio = 0.0;     // hs_norm_F(y) / (sqrt(C_F)(1 + ||y||))
  double worst_lipschitz_ratio = 0.0;  // hs(F(u)-F(v)) / (L ||u - v||)
  bool growth_holds = false;
  bool lipschitz_holds = false;
};

/// Certifies the noise conditions and checks the growth and Lipschitz
/// inequalities on random finite element states of the mesh with n cells.
NoiseValidation validate_noise(const NoiseOptions &opt, int n, int trials, std::uint64_t seed);

} // namespace sacfem
