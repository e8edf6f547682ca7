#include "sacfem/error.hpp"
#include "sacfem/parallel.hpp"
#include "sacfem/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace sacfem;

namespace {

ExperimentSettings tiny() {
  ExperimentSettings s;
  s.levels = {2, 4, 8};
  s.reference = 16;
  s.paths = 3;
  s.T = 0.01;
  s.tau = 2e-3;
  s.noise.modes = 8;
  return s;
}

template <class F> std::string config_key(F &&f) {
  try {
    f();
  } catch (const ConfigError &e) {
    return e.key();
  }
  return "";
}

} // namespace

TEST_CASE("fit_rate") {
  const std::vector<double> hs{0.5, 0.25, 0.125};
  std::vector<double> quad, flat, lin;
  for (double h : hs) {
    quad.push_back(3 * h * h);
    flat.push_back(0.1);
    lin.push_back(h);
  }
  const RateFit q = fit_rate(hs, quad);
  CHECK(q.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(q.max_residual <= 1e-12);
  CHECK(std::abs(fit_rate(hs, flat).slope) <= 1e-12);
  CHECK(fit_rate(hs, lin).slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate(std::vector<double>{0.5, 0.25}, std::vector<double>{1, 2}), ConfigError);
  CHECK_THROWS_AS(fit_rate(hs, std::vector<double>{1, 0, 2}), ConfigError);
}

TEST_CASE("mc_lp_norm") {
  const auto constant = mc_lp_norm(std::vector<double>(10, 2.5), 4);
  CHECK(constant.estimate == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(constant.standard_error == 0.0);

  CHECK(mc_lp_norm(std::vector<double>{1, 2}, 4).estimate == doctest::Approx(std::pow(8.5, 0.25)));
  CHECK(mc_lp_norm(std::vector<double>{1, 2, 2}, 2).estimate == doctest::Approx(std::sqrt(3.0)));

  const std::vector<double> spread{0.1, 0.5, 0.9, 1.4, 0.3, 0.7};
  const auto a = mc_lp_norm(spread, 2), b = mc_lp_norm(spread, 2);
  CHECK(a.standard_error > 0.0);
  CHECK(a.standard_error == b.standard_error);

  CHECK_THROWS_AS(mc_lp_norm(std::vector<double>{}, 2), ConfigError);
  CHECK_THROWS_AS(mc_lp_norm(spread, 0.5), ConfigError);
}

TEST_CASE("bootstrap interval of an exact power law is degenerate") {
  const std::vector<double> hs{0.4, 0.2, 0.1};
  std::vector<std::vector<double>> samples(3);
  for (int l = 0; l < 3; ++l)
    for (int path = 0; path < 20; ++path)
      samples[l].push_back(hs[l] * hs[l] * (1.0 + 0.1 * path));
  const auto [lo, hi] = bootstrap_rate_ci(hs, samples, 4);
  CHECK(lo == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(hi == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("parallel_for is independent of the worker count") {
  std::vector<double> one(50), three(50);
  parallel_for(50, 1, [&](int i, int) { one[i] = std::sin(i); });
  parallel_for(50, 3, [&](int i, int) { three[i] = std::sin(i); });
  CHECK(one == three);
  try {
    parallel_for(20, 3, [](int i, int) {
      if (i == 7 || i == 15)
        throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error &e) {
    CHECK(std::string(e.what()) == "7");
  }
}

TEST_CASE("operator suite rows") {
  const auto rep = operator_suite({2, 4, 8});
  REQUIRE(rep.rows.size() == 8);
  for (const auto &row : rep.rows) {
    CHECK(row.values.size() == 3);
    CHECK(std::isfinite(row.measured));
    CHECK(row.pass == (row.measured >= row.lower && row.measured <= row.upper));
  }
  CHECK_THROWS_AS(operator_suite({4, 8}), ConfigError);
}

TEST_CASE("deterministic multilevel run converges at second order") {
  ExperimentSettings s;
  s.levels = {4, 8, 16};
  s.reference = 32;
  s.paths = 1;
  s.T = 0.05;
  s.tau = 1e-3;
  s.noise.sigma = SigmaKind::zero;
  const auto r = converge_smooth(s);
  CHECK(r.final_time.valid);
  CHECK(std::abs(r.final_time.fit.slope - 2.0) <= 0.2);
  CHECK(r.final_time.rows.size() == 3);
  CHECK(r.flagged_seeds.empty());
  std::ostringstream csv;
  write_report_csv(csv, r.final_time);
  CHECK(csv.str().rfind("n,h,error,se,paths\n4,", 0) == 0);
}

TEST_CASE("coupled runs do not depend on the worker count") {
  ExperimentSettings s = tiny();
  const auto a = converge_smooth(s);
  s.workers = 3;
  const auto b = converge_smooth(s);
  CHECK(a.space_time.samples == b.space_time.samples);
  CHECK(a.uniform.samples == b.uniform.samples);
  CHECK(a.final_time.samples == b.final_time.samples);
  CHECK(a.monotone_fraction == b.monotone_fraction);
  CHECK(a.space_time.ci_lower <= a.space_time.ci_upper);

  s.coupled = false;
  const auto c = converge_smooth(s);
  CHECK(c.final_time.samples != a.final_time.samples);
}

TEST_CASE("rough runs report both evaluation times") {
  ExperimentSettings s = tiny();
  s.y0 = InitialKind::rough;
  s.t_star = 0.01;
  s.t_probe = 0.004;
  const auto r = converge_rough(s);
  CHECK(r.at_t_star.rows.size() == 3);
  CHECK(r.at_probe.rows.size() == 3);
  CHECK(r.probe_bound == doctest::Approx(std::pow(2.5, 0.25) * 3));
  CHECK(r.probe_ratio > 0.0);
  s.t_probe = 0.003;
  CHECK(config_key([&] { converge_rough(s); }) == "t_probe");
}

TEST_CASE("blow-up marks the path and invalidates the report") {
  ExperimentSettings s = tiny();
  s.amplitude = 50.0;
  s.tau = 5e-3;
  const auto r = converge_smooth(s);
  CHECK(r.flagged_seeds.size() == 3);
  CHECK_FALSE(r.space_time.valid);
}

TEST_CASE("invalid settings name the offending key") {
  ExperimentSettings s = tiny();
  s.paths = 0;
  CHECK(config_key([&] { converge_smooth(s); }) == "paths");
  s = tiny();
  s.levels = {2, 3, 8};
  CHECK(config_key([&] { converge_smooth(s); }) == "levels");
  s = tiny();
  s.reference = 8;
  CHECK(config_key([&] { converge_smooth(s); }) == "reference");
  s = tiny();
  s.tau = 3e-3;
  CHECK(config_key([&] { converge_smooth(s); }) == "tau");
  s = tiny();
  s.noise.rho = 1.0;
  CHECK(config_key([&] { converge_smooth(s); }) == "noise.rho");
  s = tiny();
  CHECK(config_key([&] { ou_validation(s, {1e-3, 2e-3}); }) == "taus");
}

TEST_CASE("linear-implicit Euler converges at first order against the exact OU path") {
  ExperimentSettings s;
  s.paths = 64;
  s.T = 0.5;
  s.noise.sigma = SigmaKind::constant;
  const auto r = ou_validation(s, {4e-3, 2e-3, 1e-3, 5e-4});
  CHECK(r.reference_tau == doctest::Approx(1.25e-4));
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    CHECK(r.rows[i].error.estimate < r.rows[i - 1].error.estimate);
  CHECK(r.pass);
}

TEST_CASE("noise inequalities on random states") {
  NoiseOptions o;
  o.modes = 16;
  const auto v = validate_noise(o, 4, 10, 3);
  CHECK(v.trials == 10);
  CHECK(v.growth_holds);
  CHECK(v.lipschitz_holds);
  CHECK(v.worst_growth_ratio > 0.0);
  CHECK(v.conditions.boundary.pass);
}

TEST_CASE("moment check without noise is deterministic") {
  ExperimentSettings s;
  s.levels = {4};
  s.paths = 4;
  s.T = 0.05;
  s.tau = 5e-3;
  s.noise.modes = 8;
  s.noise.sigma = SigmaKind::zero;
  s.amplitude = kEnvelopeAmplitude;
  const auto r = moment_check(s);
  CHECK(r.finite);
  CHECK(r.envelope_holds);
  CHECK(r.full_paths.value.standard_error == 0.0);
  CHECK(r.full_paths.value.estimate == doctest::Approx(r.deterministic_sup).epsilon(1e-12));
  CHECK(r.doubled_modes.value.estimate == doctest::Approx(r.deterministic_sup).epsilon(1e-12));
  CHECK(r.pass());
}
