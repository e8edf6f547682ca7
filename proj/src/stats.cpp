#include "sacfem/stats.hpp"
#include "sacfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sacfem {

RateFit fit_rate(std::span<const double> hs, std::span<const double> errors) {
  if (hs.size() != errors.size())
    throw ConfigError("levels", "mesh sizes and errors differ in length");
  if (hs.size() < 3)
    throw ConfigError("levels", "a rate fit needs at least 3 levels");
  const double n = static_cast<double>(hs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0) || !(errors[i] > 0.0))
      throw ConfigError("errors", "rate fit needs strictly positive mesh sizes and errors");
    sx += std::log(hs[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  if (sxx == 0.0)
    throw ConfigError("levels", "rate fit needs distinct mesh sizes");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < hs.size(); ++i)
    fit.max_residual = std::max(
        fit.max_residual, std::abs(std::log(errors[i]) - fit.intercept - fit.slope * std::log(hs[i])));
  return fit;
}

namespace {

double lp_mean(std::span<const double> s, double p) {
  double acc = 0.0;
  for (double v : s)
    acc += std::pow(std::abs(v), p);
  return std::pow(acc / static_cast<double>(s.size()), 1.0 / p);
}

void check_lp(std::size_t size, double p) {
  if (size == 0)
    throw ConfigError("paths", "Monte Carlo estimate of an empty sample");
  if (!(p >= 1.0) || std::isinf(p))
    throw ConfigError("p", "moment exponent must be finite and >= 1");
}

} // namespace

MonteCarloEstimate mc_lp_norm(std::span<const double> samples, double p, std::uint64_t seed,
                              int resamples) {
  check_lp(samples.size(), p);
  MonteCarloEstimate r;
  r.estimate = lp_mean(samples, p);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> draw(samples.size());
  double sum = 0.0, sq = 0.0;
  for (int b = 0; b < resamples; ++b) {
    for (double &v : draw)
      v = samples[pick(gen)];
    const double e = lp_mean(draw, p);
    sum += e;
    sq += e * e;
  }
  if (resamples > 1) {
    const double mean = sum / resamples;
    r.standard_error = std::sqrt(std::max(0.0, (sq - resamples * mean * mean) / (resamples - 1)));
  }
  return r;
}

std::pair<double, double> bootstrap_rate_ci(std::span<const double> hs,
                                            const std::vector<std::vector<double>> &samples,
                                            double p, std::uint64_t seed, int resamples) {
  if (samples.size() != hs.size())
    throw ConfigError("levels", "one sample set per level is required");
  const std::size_t paths = samples.front().size();
  for (const auto &s : samples) {
    if (s.size() != paths)
      throw ConfigError("paths", "levels have different path counts");
  }
  check_lp(paths, p);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, paths - 1);
  std::vector<double> slopes;
  std::vector<std::size_t> idx(paths);
  std::vector<double> draw(paths), errors(hs.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto &i : idx)
      i = pick(gen);
    bool positive = true;
    for (std::size_t l = 0; l < hs.size(); ++l) {
      for (std::size_t k = 0; k < paths; ++k)
        draw[k] = samples[l][idx[k]];
      errors[l] = lp_mean(draw, p);
      positive = positive && errors[l] > 0.0;
    }
    if (positive)
      slopes.push_back(fit_rate(hs, errors).slope);
  }
  if (slopes.empty())
    return {0.0, 0.0};
  std::sort(slopes.begin(), slopes.end());
  auto quantile = [&](double q) {
    const double pos = q * (slopes.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - lo) * (slopes[hi] - slopes[lo]);
  };
  return {quantile(0.025), quantile(0.975)};
}

} // namespace sacfem
