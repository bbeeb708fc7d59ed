#pragma once

// Line-oriented `key = value` run configuration with `#` comments.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sixwave/core.hpp"
#include "sixwave/duhamel.hpp"
#include "sixwave/error.hpp"

namespace sixwave {

struct InitSpec {
  enum class Kind { Zero, MaxwellianScaled, RayleighJeans, File };
  Kind kind = Kind::Zero;
  double eps = 0.0;
  double a = 1.0, b = 0.0;
  std::string path;

  Field build(const WeightParams& w) const {
    switch (kind) {
      case Kind::Zero: return Field::zero();
      case Kind::MaxwellianScaled: return scaled(eps, maxwellian(w));
      case Kind::RayleighJeans: {
        const double a_ = a, b_ = b;
        return Field::analytic([a_, b_](double, double v) { return 1.0 / (a_ + b_ * v * v); });
      }
      case Kind::File: return read_grid_csv(path);
    }
    return Field::zero();
  }
};

struct RunConfig {
  WeightParams weights;
  SolverConfig solver;
  InitSpec init;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "")
    throw Error(ErrorKind::Usage, "invalid number for " + key + ": '" + text + "'");
  return v;
}

inline long to_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "")
    throw Error(ErrorKind::Usage, "invalid integer for " + key + ": '" + text + "'");
  return v;
}

inline bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorKind::Usage, "invalid boolean for " + key + ": '" + text + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline InitSpec parse_init(const std::string& text) {
  InitSpec spec;
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : trim(text.substr(colon + 1));
  if (kind == "zero" && colon == std::string::npos) {
    spec.kind = InitSpec::Kind::Zero;
  } else if (kind == "maxwellian_scaled") {
    spec.kind = InitSpec::Kind::MaxwellianScaled;
    spec.eps = to_double("init", arg);
  } else if (kind == "rj") {
    const auto parts = split(arg, ',');
    if (parts.size() != 2) throw Error(ErrorKind::Usage, "init rj needs rj:a,b");
    spec.kind = InitSpec::Kind::RayleighJeans;
    spec.a = to_double("init", parts[0]);
    spec.b = to_double("init", parts[1]);
    if (!(spec.a > 0.0) || !(spec.b >= 0.0)) throw Error(ErrorKind::Usage, "init rj needs a > 0 and b >= 0");
  } else if (kind == "file" && !arg.empty()) {
    spec.kind = InitSpec::Kind::File;
    spec.path = arg;
  } else {
    throw Error(ErrorKind::Usage, "unknown init '" + text + "' (zero | maxwellian_scaled:eps | rj:a,b | file:path)");
  }
  return spec;
}

}  // namespace detail

/// Parses configuration text. Required keys: alpha, beta. Everything else
/// falls back to SolverConfig::defaults for the given weights.
inline RunConfig parse_config_text(const std::string& text) {
  static const std::set<std::string> known = {
      "alpha", "beta", "eps_tail", "nx", "nv", "n_theta", "Lx", "Lv", "time_grid", "picard_tol", "max_iters",
      "scatter_tol", "scatter_t_max", "enforce_thresholds", "center_on_maxwellian", "slack", "seed", "init"};
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!known.count(key)) throw Error(ErrorKind::Usage, "unknown key: " + key);
    if (kv.count(key)) throw Error(ErrorKind::Usage, "duplicate key: " + key);
    if (value.empty()) throw Error(ErrorKind::Usage, "empty value for key: " + key);
    kv[key] = value;
  }
  for (const char* req : {"alpha", "beta"})
    if (!kv.count(req)) throw Error(ErrorKind::Usage, std::string("missing required key: ") + req);

  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = kv.find(k);
    return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  auto num = [&](const std::string& k) -> std::optional<double> {
    const auto s = get(k);
    return s ? std::optional<double>(detail::to_double(k, *s)) : std::nullopt;
  };

  RunConfig rc;
  rc.weights = WeightParams::make(*num("alpha"), *num("beta"), num("eps_tail").value_or(1e-10), num("Lx"), num("Lv"));
  rc.solver = SolverConfig::defaults(rc.weights);
  const int nx = get("nx") ? static_cast<int>(detail::to_int("nx", *get("nx"))) : 65;
  const int nv = get("nv") ? static_cast<int>(detail::to_int("nv", *get("nv"))) : 65;
  rc.solver.quadrature.grid = PhaseGrid::from_weights(rc.weights, nx, nv);
  if (auto s = get("n_theta")) rc.solver.quadrature.n_theta = static_cast<int>(detail::to_int("n_theta", *s));
  if (auto s = get("time_grid")) {
    const auto parts = detail::split(*s, ',');
    if (parts.size() != 3) throw Error(ErrorKind::Usage, "time_grid needs t_min, t_max, nt");
    const double t0 = detail::to_double("time_grid", parts[0]);
    const double t1 = detail::to_double("time_grid", parts[1]);
    const long nt = detail::to_int("time_grid", parts[2]);
    if (!(t0 <= 0.0 && t1 >= 0.0 && t1 > t0)) throw Error(ErrorKind::Usage, "time_grid must satisfy t_min <= 0 <= t_max");
    if (nt < 2) throw Error(ErrorKind::Usage, "time_grid needs nt >= 2");
    rc.solver.time_grid = uniform_times(t0, t1, static_cast<int>(nt));
  }
  if (auto v = num("picard_tol")) {
    if (!(*v > 0.0)) throw Error(ErrorKind::Usage, "picard_tol must be positive");
    rc.solver.picard_tol = *v;
  }
  if (auto s = get("max_iters")) rc.solver.max_iters = static_cast<int>(detail::to_int("max_iters", *s));
  if (auto v = num("scatter_tol")) {
    if (!(*v > 0.0)) throw Error(ErrorKind::Usage, "scatter_tol must be positive");
    rc.solver.scatter_tol = *v;
  }
  if (auto v = num("scatter_t_max")) rc.solver.scatter_t_max = *v;
  if (auto s = get("enforce_thresholds")) rc.solver.enforce_thresholds = detail::to_bool("enforce_thresholds", *s);
  if (auto s = get("center_on_maxwellian"))
    rc.solver.center_on_maxwellian = detail::to_bool("center_on_maxwellian", *s);
  if (auto v = num("slack")) rc.solver.slack = *v;
  if (auto s = get("seed")) {
    const long seed = detail::to_int("seed", *s);
    if (seed < 0) throw Error(ErrorKind::Usage, "seed must be nonnegative");
    rc.seed = static_cast<std::uint64_t>(seed);
  }
  if (auto s = get("init")) rc.init = detail::parse_init(*s);
  rc.solver.validate();
  return rc;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace sixwave
