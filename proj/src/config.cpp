#include "sacfem/error.hpp"
#include "sacfem/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace sacfem {

namespace {

const std::pair<Command, const char *> kCommands[] = {
    {Command::mesh_info, "mesh-info"},           {Command::operators, "operators"},
    {Command::converge_smooth, "converge-smooth"}, {Command::converge_rough, "converge-rough"},
    {Command::validate_noise, "validate-noise"}, {Command::ou_validate, "ou-validate"},
    {Command::moments, "moments"}};

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &key, const std::string &v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](auto &s) { return s.empty(); }))
    throw ConfigError(key, "expected a comma-separated list, got '" + v + "'");
  return out;
}

template <class T> T parse_number(const std::string &key, const std::string &v) {
  T out{};
  const char *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "cannot parse '" + v + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out))
      throw ConfigError(key, "value must be finite");
  return out;
}

bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "off")
    return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

template <class T> void require(const std::string &key, T value, bool ok, const std::string &range) {
  if (!ok) {
    std::ostringstream m;
    m << "value " << value << " out of range (" << range << ")";
    throw ConfigError(key, m.str());
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T> std::string join(const std::vector<T> &xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i)
      out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig &, const std::string &key, const std::string &v)>;

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto positive_int = [](int ExperimentSettings::*field, int min) {
      return [field, min](ExperimentConfig &c, const std::string &k, const std::string &v) {
        const int x = parse_number<int>(k, v);
        require(k, x, x >= min, ">= " + std::to_string(min));
        c.settings.*field = x;
      };
    };
    auto positive_real = [](double ExperimentSettings::*field) {
      return [field](ExperimentConfig &c, const std::string &k, const std::string &v) {
        const double x = parse_number<double>(k, v);
        require(k, x, x > 0.0, "> 0");
        c.settings.*field = x;
      };
    };
    auto exponent = [](double ExperimentSettings::*field) {
      return [field](ExperimentConfig &c, const std::string &k, const std::string &v) {
        const double x = parse_number<double>(k, v);
        require(k, x, x >= 1.0, ">= 1");
        c.settings.*field = x;
      };
    };
    auto flag = [](bool ExperimentSettings::*field) {
      return [field](ExperimentConfig &c, const std::string &k, const std::string &v) {
        c.settings.*field = parse_bool(k, v);
      };
    };
    t["command"] = [](ExperimentConfig &c, const std::string &, const std::string &v) {
      c.command = parse_command(v);
    };
    t["levels"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      std::vector<int> levels;
      for (const auto &s : split_list(k, v)) {
        levels.push_back(parse_number<int>(k, s));
        require(k, levels.back(), levels.back() >= 1 && levels.back() <= 128, "1..128");
      }
      c.settings.levels = levels;
    };
    t["reference"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      const int x = parse_number<int>(k, v);
      require(k, x, x >= 2 && x <= 128, "2..128");
      c.settings.reference = x;
    };
    t["paths"] = positive_int(&ExperimentSettings::paths, 1);
    t["workers"] = positive_int(&ExperimentSettings::workers, 1);
    t["p"] = exponent(&ExperimentSettings::p);
    t["q"] = exponent(&ExperimentSettings::q);
    t["tau"] = positive_real(&ExperimentSettings::tau);
    t["T"] = positive_real(&ExperimentSettings::T);
    t["t_star"] = positive_real(&ExperimentSettings::t_star);
    t["t_probe"] = positive_real(&ExperimentSettings::t_probe);
    t["amplitude"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      c.settings.amplitude = parse_number<double>(k, v);
    };
    t["seed"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      c.settings.seed = parse_number<std::uint64_t>(k, v);
    };
    t["scheme"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      try {
        c.settings.scheme = parse_scheme(v);
      } catch (const ConfigError &e) {
        throw ConfigError(k, e.what());
      }
    };
    t["y0"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      try {
        c.settings.y0 = parse_initial_kind(v);
      } catch (const ConfigError &e) {
        throw ConfigError(k, e.what());
      }
    };
    t["taming"] = flag(&ExperimentSettings::taming);
    t["nonlinearity"] = flag(&ExperimentSettings::nonlinearity_on);
    t["coupled"] = flag(&ExperimentSettings::coupled);
    t["output_dir"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      if (v.empty())
        throw ConfigError(k, "must not be empty");
      c.output_dir = v;
    };
    t["trials"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      const int x = parse_number<int>(k, v);
      require(k, x, x >= 1, ">= 1");
      c.trials = x;
    };
    t["taus"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      std::vector<double> taus;
      for (const auto &s : split_list(k, v)) {
        taus.push_back(parse_number<double>(k, s));
        require(k, taus.back(), taus.back() > 0.0, "> 0");
      }
      c.taus = taus;
    };
    t["noise.rho"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      const double x = parse_number<double>(k, v);
      require(k, x, x > kMinimumRho, "> 1.25, otherwise the noise series diverges");
      c.settings.noise.rho = x;
    };
    t["noise.N"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      const int x = parse_number<int>(k, v);
      require(k, x, x >= 1 && x <= 4096, "1..4096");
      c.settings.noise.modes = x;
    };
    t["noise.sigma_kind"] = [](ExperimentConfig &c, const std::string &, const std::string &v) {
      c.settings.noise.sigma = parse_sigma_kind(v);
    };
    t["noise.violate_boundary"] = [](ExperimentConfig &c, const std::string &k, const std::string &v) {
      c.settings.noise.violate_boundary = parse_bool(k, v);
    };
    return t;
  }();
  return table;
}

} // namespace

Command parse_command(const std::string &s) {
  for (const auto &[c, name] : kCommands)
    if (s == name)
      return c;
  throw ConfigError("command", "unknown command '" + s + "'");
}

std::string to_string(Command c) {
  for (const auto &[k, name] : kCommands)
    if (k == c)
      return name;
  return "?";
}

ExperimentConfig default_config(Command c) {
  ExperimentConfig cfg;
  cfg.command = c;
  ExperimentSettings &s = cfg.settings;
  switch (c) {
  case Command::converge_rough:
    s.y0 = InitialKind::rough;
    s.paths = 64;
    break;
  case Command::moments:
    s.levels = {8};
    s.T = 0.5;
    s.tau = 1e-3;
    s.paths = 64;
    s.amplitude = 0.0;
    break;
  case Command::ou_validate:
    s.T = 0.5;
    s.paths = 256;
    s.p = 2.0;
    s.noise.sigma = SigmaKind::constant;
    s.nonlinearity_on = false;
    break;
  case Command::validate_noise:
    s.levels = {8};
    break;
  default:
    break;
  }
  return cfg;
}

namespace {

ExperimentConfig parse_impl(const std::string &text, bool skip_info) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("line " + std::to_string(number), "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number), "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty())
      key = section + "." + key;
    if (skip_info && key.rfind("info.", 0) == 0)
      continue;
    if (!setters().contains(key))
      throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second)
      throw ConfigError(key, "duplicate key");
    entries.emplace_back(key, value);
  }
  Command command = Command::converge_smooth;
  for (const auto &[k, v] : entries)
    if (k == "command")
      command = parse_command(v);
  ExperimentConfig cfg = default_config(command);
  for (const auto &[k, v] : entries)
    setters().at(k)(cfg, k, v);
  return cfg;
}

} // namespace

ExperimentConfig parse_config(const std::string &text) { return parse_impl(text, false); }

ExperimentConfig load_config(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in)
    throw ConfigError("config", "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  // manifests carry info.* lines that do not affect the run
  return parse_impl(ss.str(), true);
}

std::map<std::string, std::string> manifest_entries(const ExperimentConfig &c) {
  const ExperimentSettings &s = c.settings;
  std::map<std::string, std::string> m;
  m["command"] = to_string(c.command);
  m["levels"] = join(s.levels);
  m["reference"] = std::to_string(s.reference);
  m["paths"] = std::to_string(s.paths);
  m["p"] = fmt(s.p);
  m["q"] = fmt(s.q);
  m["tau"] = fmt(s.tau);
  m["T"] = fmt(s.T);
  m["t_star"] = fmt(s.t_star);
  m["t_probe"] = fmt(s.t_probe);
  m["seed"] = std::to_string(s.seed);
  m["scheme"] = to_string(s.scheme);
  m["y0"] = to_string(s.y0);
  m["amplitude"] = fmt(s.amplitude);
  m["taming"] = s.taming ? "true" : "false";
  m["nonlinearity"] = s.nonlinearity_on ? "true" : "false";
  m["coupled"] = s.coupled ? "true" : "false";
  m["trials"] = std::to_string(c.trials);
  m["taus"] = join(c.taus);
  m["noise.rho"] = fmt(s.noise.rho);
  m["noise.N"] = std::to_string(s.noise.modes);
  m["noise.sigma_kind"] = to_string(s.noise.sigma);
  m["noise.violate_boundary"] = s.noise.violate_boundary ? "true" : "false";
  return m;
}

std::string format_manifest(const ExperimentConfig &c, const std::map<std::string, std::string> &info) {
  std::map<std::string, std::string> all = manifest_entries(c);
  for (const auto &[k, v] : info)
    all["info." + k] = v;
  std::string out;
  for (const auto &[k, v] : all)
    out += k + " = " + v + "\n";
  return out;
}

} // namespace sacfem
