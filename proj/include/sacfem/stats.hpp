#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sacfem {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0; // max |log residual|
};

/// Least squares of log(error) on log(h). Needs >= 3 positive points.
RateFit fit_rate(std::span<const double> hs, std::span<const double> errors);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

inline constexpr std::uint64_t kBootstrapSeed = 0x5eedb007ULL;
inline constexpr int kBootstrapResamples = 1000;

/// (mean s^p)^{1/p} with a nonparametric bootstrap standard error.
MonteCarloEstimate mc_lp_norm(std::span<const double> samples, double p,
                              std::uint64_t seed = kBootstrapSeed,
                              int resamples = kBootstrapResamples);

/// 95% percentile interval of the fitted slope when whole paths are
/// resampled (the same path indices at every level, keeping the coupling).
/// samples[level][path].
std::pair<double, double> bootstrap_rate_ci(std::span<const double> hs,
                                            const std::vector<std::vector<double>> &samples,
                                            double p, std::uint64_t seed = kBootstrapSeed,
                                            int resamples = kBootstrapResamples);

} // namespace sacfem
