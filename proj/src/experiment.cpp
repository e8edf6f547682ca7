#include "sacfem/error.hpp"
#include "sacfem/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sacfem {

namespace fs = std::filesystem;

namespace {

class Run {
public:
  explicit Run(const ExperimentConfig &c) : cfg_(c) { fs::create_directories(c.output_dir); }

  std::ofstream open(const std::string &name) {
    const fs::path path = cfg_.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    outcome.files.push_back(path);
    return out;
  }

  void check(bool ok, const std::string &line) {
    outcome.checks.push_back((ok ? "PASS " : "FAIL ") + line);
    if (!ok && outcome.exit_code == exit_pass)
      outcome.exit_code = exit_fail;
  }

  void numerical(const std::string &line) {
    outcome.checks.push_back("FAIL " + line);
    outcome.exit_code = exit_numerical;
  }

  RunOutcome outcome;

private:
  const ExperimentConfig &cfg_;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

void write_rate(std::ostream &out, const ConvergenceReport &r) {
  out << r.name << ',' << r.fit.slope << ',' << r.fit.intercept << ',' << r.fit.max_residual << ','
      << r.ci_lower << ',' << r.ci_upper << ',' << r.flagged << ',' << (r.valid ? 1 : 0) << '\n';
}

void write_samples(std::ostream &out, const ConvergenceReport &r) {
  out << "path";
  for (const auto &row : r.rows)
    out << ",n" << row.n;
  out << '\n';
  const std::size_t paths = r.samples.empty() ? 0 : r.samples.front().size();
  for (std::size_t i = 0; i < paths; ++i) {
    out << i;
    for (const auto &level : r.samples)
      out << ',' << level[i];
    out << '\n';
  }
}

void report_files(Run &run, const ConvergenceReport &r) {
  auto csv = run.open(r.name + ".csv");
  write_report_csv(csv, r);
  auto samples = run.open(r.name + "_samples.csv");
  write_samples(samples, r);
}

void flagged_check(Run &run, const std::vector<std::uint64_t> &seeds) {
  if (seeds.empty()) {
    run.check(true, "flagged_paths = 0");
    return;
  }
  std::string list;
  for (auto s : seeds)
    list += (list.empty() ? "" : " ") + std::to_string(s);
  run.numerical("flagged_paths = " + std::to_string(seeds.size()) + " seeds: " + list);
}

void mesh_info(Run &run, const ExperimentConfig &c) {
  const auto &levels = c.settings.levels;
  int depth = 0;
  while ((levels.front() << depth) < levels.back())
    ++depth;
  const auto meshes = build_hierarchy(levels.front(), depth);
  auto out = run.open("mesh_info.csv");
  out << "n,h,vertices,tets,dofs,quasi_uniformity,conforming,nested\n";
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const Mesh &m = *meshes[i];
    const bool conforming = check_conformity(m).conforming;
    const bool nested = i == 0 || is_nested(*meshes[i - 1], m);
    const double q = quasi_uniformity_ratio(m);
    out << (levels.front() << i) << ',' << m.h << ',' << m.vertex_count() << ',' << m.tet_count() << ','
        << interior_count(m) << ',' << q << ',' << conforming << ',' << nested << '\n';
    const std::string tag = "n=" + std::to_string(levels.front() << i);
    run.check(conforming, "conforming " + tag);
    run.check(nested, "nested " + tag);
  }
}

void operators(Run &run, const ExperimentConfig &c) {
  const auto rep = operator_suite(c.settings.levels);
  auto out = run.open("operators.csv");
  out << "name,kind,measured,lower,upper,pass,values\n";
  for (const auto &row : rep.rows) {
    out << row.name << ',' << row.kind << ',' << row.measured << ',' << row.lower << ',' << row.upper
        << ',' << row.pass << ',';
    for (std::size_t i = 0; i < row.values.size(); ++i)
      out << (i ? ";" : "") << row.values[i];
    out << '\n';
    run.check(row.pass, row.name + " = " + num(row.measured) + " in [" + num(row.lower) + ", " +
                            num(row.upper) + "]");
  }
}

void smooth(Run &run, const ExperimentConfig &c) {
  const auto r = converge_smooth(c.settings);
  for (const auto *rep : {&r.space_time, &r.uniform, &r.final_time})
    report_files(run, *rep);
  auto rates = run.open("rates.csv");
  rates << "report,slope,intercept,max_residual,ci_lower,ci_upper,flagged,valid\n";
  for (const auto *rep : {&r.space_time, &r.uniform, &r.final_time})
    write_rate(rates, *rep);
  const double a = r.space_time.fit.slope, b = r.uniform.fit.slope;
  run.check(a >= 1.6 && a <= 2.4, "space_time_rate = " + num(a) + " in [1.6, 2.4]");
  run.check(b >= 1.5, "uniform_rate = " + num(b) + " >= 1.5");
  run.check(r.monotone_fraction >= 0.9, "monotone_fraction = " + num(r.monotone_fraction) + " >= 0.9");
  flagged_check(run, r.flagged_seeds);
}

void rough(Run &run, const ExperimentConfig &c) {
  const auto r = converge_rough(c.settings);
  report_files(run, r.at_t_star);
  report_files(run, r.at_probe);
  auto rates = run.open("rates.csv");
  rates << "report,slope,intercept,max_residual,ci_lower,ci_upper,flagged,valid\n";
  write_rate(rates, r.at_t_star);
  write_rate(rates, r.at_probe);
  auto probe = run.open("probe.csv");
  probe << "t_star,t_probe,ratio,bound\n"
        << c.settings.t_star << ',' << c.settings.t_probe << ',' << r.probe_ratio << ',' << r.probe_bound << '\n';
  bool decreasing = true;
  for (std::size_t i = 1; i < r.at_t_star.rows.size(); ++i)
    decreasing = decreasing && r.at_t_star.rows[i].error < r.at_t_star.rows[i - 1].error;
  const double bound = 2.0 / c.settings.p - 0.25;
  run.check(decreasing, "errors_strictly_decreasing");
  run.check(r.at_t_star.fit.slope >= bound,
            "rate = " + num(r.at_t_star.fit.slope) + " >= " + num(bound));
  flagged_check(run, r.flagged_seeds);
}

void noise(Run &run, const ExperimentConfig &c) {
  const auto v = validate_noise(c.settings.noise, c.settings.levels.front(), c.trials, c.settings.seed);
  auto out = run.open("conditions.csv");
  out << "condition,mode,partial_sum\n";
  const ConditionReport &rep = v.conditions;
  for (const auto *e : {&rep.boundary, &rep.growth, &rep.lipschitz})
    for (std::size_t i = 0; i < e->partial_sums.size(); ++i)
      out << e->name << ',' << i + 1 << ',' << e->partial_sums[i] << '\n';
  auto summary = run.open("noise_summary.csv");
  summary << "quantity,value\n"
          << "cf_estimate," << rep.cf_estimate << '\n'
          << "growth_tail," << rep.growth.tail_fraction << '\n'
          << "lipschitz_tail," << rep.lipschitz.tail_fraction << '\n'
          << "worst_growth_ratio," << v.worst_growth_ratio << '\n'
          << "worst_lipschitz_ratio," << v.worst_lipschitz_ratio << '\n';
  run.check(rep.boundary.pass, "boundary_condition total = " + num(rep.boundary.total));
  for (const auto *e : {&rep.growth, &rep.lipschitz})
    run.check(e->pass, e->name + "_tail = " + num(e->tail_fraction) + " <= " + num(rep.tail_tolerance));
  run.check(v.growth_holds, "growth_inequality worst ratio = " + num(v.worst_growth_ratio) + " <= 1");
  run.check(v.lipschitz_holds, "lipschitz_inequality worst ratio = " + num(v.worst_lipschitz_ratio) + " <= 1.05");
}

void ou(Run &run, const ExperimentConfig &c) {
  const auto r = ou_validation(c.settings, c.taus);
  auto out = run.open("ou.csv");
  out << "tau,error,se\n";
  for (const auto &row : r.rows)
    out << row.tau << ',' << row.error.estimate << ',' << row.error.standard_error << '\n';
  auto rates = run.open("rates.csv");
  rates << "report,slope,intercept,max_residual,reference_tau\n"
        << "ou," << r.fit.slope << ',' << r.fit.intercept << ',' << r.fit.max_residual << ','
        << r.reference_tau << '\n';
  run.check(r.pass, "ou_rate = " + num(r.fit.slope) + " in [0.7, 1.3]");
}

void moments(Run &run, const ExperimentConfig &c) {
  const auto r = moment_check(c.settings);
  auto out = run.open("moments.csv");
  out << "label,paths,modes,estimate,se\n";
  for (const auto *m : {&r.half_paths, &r.full_paths, &r.doubled_modes})
    out << m->label << ',' << m->paths << ',' << m->modes << ',' << m->value.estimate << ','
        << m->value.standard_error << '\n';
  out << "deterministic,1," << c.settings.noise.modes << ',' << r.deterministic_sup << ','
      << r.deterministic_bound << '\n';
  run.check(r.finite, "moments_finite");
  run.check(r.paths_stable, "stable_under_doubling_paths " + num(r.half_paths.value.estimate) + " -> " +
                                num(r.full_paths.value.estimate));
  run.check(r.modes_stable, "stable_under_doubling_modes " + num(r.full_paths.value.estimate) + " -> " +
                                num(r.doubled_modes.value.estimate));
  run.check(r.envelope_holds, "deterministic_envelope " + num(r.deterministic_sup) +
                                  " <= " + num(r.deterministic_bound));
  if (r.flagged > 0)
    run.numerical("flagged_paths = " + std::to_string(r.flagged));
  else
    run.check(true, "flagged_paths = 0");
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig &c) {
  const auto start = std::chrono::steady_clock::now();
  Run run(c);
  try {
    switch (c.command) {
    case Command::mesh_info: mesh_info(run, c); break;
    case Command::operators: operators(run, c); break;
    case Command::converge_smooth: smooth(run, c); break;
    case Command::converge_rough: rough(run, c); break;
    case Command::validate_noise: noise(run, c); break;
    case Command::ou_validate: ou(run, c); break;
    case Command::moments: moments(run, c); break;
    }
  } catch (const ConfigError &) {
    throw;
  } catch (const PathError &e) {
    run.numerical(std::string("path failure: ") + e.what());
  } catch (const SolverError &e) {
    run.numerical(std::string("solver failure: ") + e.what());
  }
  {
    auto checks = run.open("checks.txt");
    for (const auto &line : run.outcome.checks)
      checks << line << '\n';
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    auto manifest = run.open("manifest.txt");
    manifest << format_manifest(c, {{"exit_code", std::to_string(run.outcome.exit_code)},
                                    {"output_dir", c.output_dir.string()},
                                    {"wall_time_s", num(wall)},
                                    {"workers", std::to_string(c.settings.workers)}});
  }
  return run.outcome;
}

ReplayOutcome replay(const fs::path &manifest, const fs::path &output_dir, int workers) {
  ExperimentConfig c = load_config(manifest);
  c.output_dir = output_dir;
  c.settings.workers = workers;
  if (fs::exists(output_dir) && fs::equivalent(output_dir, manifest.parent_path()))
    throw ConfigError("output", "replay needs a directory other than the original run");
  const RunOutcome run = run_experiment(c);
  ReplayOutcome out;
  auto slurp = [](const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  for (const auto &file : run.files) {
    if (file.filename() == "manifest.txt")
      continue;
    const fs::path original = manifest.parent_path() / file.filename();
    if (!fs::exists(original) || slurp(original) != slurp(file))
      out.mismatches.push_back(file.filename().string());
  }
  out.exit_code = out.mismatches.empty() ? run.exit_code : exit_fail;
  return out;
}

} // namespace sacfem
