#include "sacfem/error.hpp"
#include "sacfem/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sacfem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("sacfem_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string key_of(const std::string &text) {
  try {
    parse_config(text);
  } catch (const ConfigError &e) {
    return e.key();
  }
  return "";
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config("command = converge-rough\n"
                              "levels = 2, 4, 8   # nested\n"
                              "reference = 16\n"
                              "[noise]\n"
                              "rho = 2.0\n"
                              "N = 12\n"
                              "sigma_kind = tanh-bounded\n");
  CHECK(c.command == Command::converge_rough);
  CHECK(c.settings.y0 == InitialKind::rough);
  CHECK(c.settings.paths == 64);
  CHECK(c.settings.levels == std::vector<int>{2, 4, 8});
  CHECK(c.settings.reference == 16);
  CHECK(c.settings.noise.rho == 2.0);
  CHECK(c.settings.noise.modes == 12);
  CHECK(c.settings.noise.sigma == SigmaKind::tanh_bounded);
}

TEST_CASE("strict config rejection names the key") {
  CHECK(key_of("paths = 0\n") == "paths");
  CHECK(key_of("pahts = 4\n") == "pahts");
  CHECK(key_of("p = 4\np = 5\n") == "p");
  CHECK(key_of("tau = -1\n") == "tau");
  CHECK(key_of("tau = 1e-3x\n") == "tau");
  CHECK(key_of("levels = 4,,8\n") == "levels");
  CHECK(key_of("scheme = explicit\n") == "scheme");
  CHECK(key_of("[noise]\nrho = 1.2\n") == "noise.rho");
  CHECK(key_of("noise.sigma_kind = cubic\n") == "noise.sigma_kind");
  CHECK(key_of("command = converge\n") == "command");
  CHECK(key_of("info.workers = 3\n") == "info.workers");
  try {
    parse_config("[noise]\nrho = 1.0\n");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("diverges") != std::string::npos);
  }
}

TEST_CASE("manifest round trip") {
  ExperimentConfig c = default_config(Command::ou_validate);
  c.settings.tau = 0.1 + 0.2;
  c.settings.seed = 18446744073709551615ULL;
  c.taus = {1.0 / 3.0, 2e-3};
  const std::string text = format_manifest(c, {{"workers", "7"}});
  CHECK(text.find("info.workers = 7\n") != std::string::npos);
  // sorted keys
  std::istringstream in(text);
  std::string line, prev;
  while (std::getline(in, line)) {
    CHECK(prev <= line);
    prev = line;
  }
  const fs::path dir = scratch("manifest");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.txt") << text;
  const ExperimentConfig back = load_config(dir / "manifest.txt");
  CHECK(manifest_entries(back) == manifest_entries(c));
  CHECK(back.settings.tau == c.settings.tau);
  CHECK(back.taus == c.taus);
}

TEST_CASE("run writes checks and manifest inside output_dir") {
  ExperimentConfig c = default_config(Command::mesh_info);
  c.settings.levels = {2, 4};
  c.output_dir = scratch("mesh");
  const auto r = run_experiment(c);
  CHECK(r.exit_code == exit_pass);
  for (const auto &f : r.files)
    CHECK(f.parent_path() == c.output_dir);
  CHECK(fs::exists(c.output_dir / "mesh_info.csv"));
  CHECK(slurp(c.output_dir / "checks.txt").rfind("PASS conforming n=2\n", 0) == 0);
}

TEST_CASE("same config twice gives byte-identical outputs, and replay agrees") {
  ExperimentConfig c = parse_config("command = converge-smooth\n"
                                    "levels = 2, 4, 8\nreference = 16\npaths = 3\n"
                                    "T = 0.01\ntau = 2e-3\nnoise.N = 8\n");
  c.output_dir = scratch("run_a");
  const auto a = run_experiment(c);
  c.output_dir = scratch("run_b");
  c.settings.workers = 3;
  const auto b = run_experiment(c);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i)
    if (a.files[i].filename() != "manifest.txt")
      CHECK(slurp(a.files[i]) == slurp(b.files[i]));

  const fs::path first = a.files.front().parent_path();
  const auto same = replay(first / "manifest.txt", scratch("replay"), 2);
  CHECK(same.mismatches.empty());
  CHECK(same.exit_code == a.exit_code);

  std::ofstream(first / "smooth_final.csv", std::ios::app) << "tampered\n";
  const auto diff = replay(first / "manifest.txt", scratch("replay2"), 1);
  CHECK(diff.mismatches == std::vector<std::string>{"smooth_final.csv"});
  CHECK(diff.exit_code == exit_fail);
}

TEST_CASE("invalid level layout is a config error") {
  ExperimentConfig c = parse_config("levels = 3, 4, 8\nreference = 16\n");
  c.output_dir = scratch("bad");
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}
