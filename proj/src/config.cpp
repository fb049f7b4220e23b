#include "logschro/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "logschro/errors.hpp"

namespace logschro {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct KvStore {
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> data;
  mutable std::set<std::string> consumed;  // "section.key"

  bool has(const std::string& sec, const std::string& key) const {
    auto s = data.find(sec);
    return s != data.end() && s->second.count(key) > 0;
  }
  std::string take(const std::string& sec, const std::string& key) const {
    consumed.insert(sec + "." + key);
    return data.at(sec).at(key);
  }
};

double parse_double(const std::string& sec, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + sec + "." + key + " = '" + v + "' is not a number");
  }
}

long parse_int(const std::string& sec, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + sec + "." + key + " = '" + v + "' is not an integer");
  }
}

bool parse_bool(const std::string& sec, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + sec + "." + key + " = '" + v + "' is not a boolean");
}

std::vector<double> parse_coords(const std::string& sec, const std::string& key,
                                 const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(sec, key, item));
  }
  return out;
}

}  // namespace

const char* kind_name(ExperimentConfig::Kind k) {
  switch (k) {
    case ExperimentConfig::Kind::gausson_check: return "gausson-check";
    case ExperimentConfig::Kind::ground: return "ground";
    case ExperimentConfig::Kind::blimit: return "blimit";
    case ExperimentConfig::Kind::multibump: return "multibump";
    case ExperimentConfig::Kind::decompose: return "decompose";
  }
  return "unknown";
}

ExperimentConfig::Kind kind_from_name(const std::string& name) {
  if (name == "gausson-check") return ExperimentConfig::Kind::gausson_check;
  if (name == "ground") return ExperimentConfig::Kind::ground;
  if (name == "blimit") return ExperimentConfig::Kind::blimit;
  if (name == "multibump") return ExperimentConfig::Kind::multibump;
  if (name == "decompose") return ExperimentConfig::Kind::decompose;
  throw ConfigError("config: unknown experiment '" + name +
                    "' (expected gausson-check, ground, blimit, multibump or decompose)");
}

ExperimentConfig parse_config(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> kKnown = {
      {"experiment", {"name", "seed"}},
      {"grid", {"dim", "L", "L_list", "M"}},
      {"coefficients", {"family", "v", "q", "v0", "v1", "q0", "q1", "normalize_potential"}},
      {"solver", {"tol", "max_iter", "newton_switch", "stabilize_every", "r", "rho"}},
      {"glue", {"R", "centers"}},
      {"analysis", {"q", "decompose_R", "threshold", "field_in"}},
      {"output", {"csv"}},
  };

  KvStore kv;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kKnown.count(section))
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!kKnown.at(section).count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in section [" + section + "]");
    if (kv.data[section].count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.data[section][key] = val;
  }

  ExperimentConfig cfg;
  cfg.raw = text;

  if (!kv.has("experiment", "name")) throw ConfigError("config: experiment.name is required");
  cfg.kind = kind_from_name(kv.take("experiment", "name"));
  if (kv.has("experiment", "seed"))
    cfg.seed = static_cast<std::uint64_t>(parse_int("experiment", "seed", kv.take("experiment", "seed")));
  cfg.solver.seed = cfg.seed;

  if (kv.has("grid", "dim")) cfg.dim = static_cast<int>(parse_int("grid", "dim", kv.take("grid", "dim")));
  if (kv.has("grid", "M")) cfg.M = static_cast<int>(parse_int("grid", "M", kv.take("grid", "M")));
  if (kv.has("grid", "L")) cfg.L = static_cast<int>(parse_int("grid", "L", kv.take("grid", "L")));
  if (kv.has("grid", "L_list")) {
    for (double v : parse_coords("grid", "L_list", kv.take("grid", "L_list")))
      cfg.L_list.push_back(static_cast<int>(v));
  }

  if (kv.has("coefficients", "family")) {
    std::string fam = kv.take("coefficients", "family");
    if (fam == "constant")
      cfg.coeff.family = CoefficientSpec::Family::constant;
    else if (fam == "cosine")
      cfg.coeff.family = CoefficientSpec::Family::cosine;
    else
      throw ConfigError("config: coefficients.family must be constant or cosine, got '" + fam + "'");
  }
  if (cfg.coeff.family == CoefficientSpec::Family::constant) {
    if (kv.has("coefficients", "v"))
      cfg.coeff.v0 = parse_double("coefficients", "v", kv.take("coefficients", "v"));
    if (kv.has("coefficients", "q"))
      cfg.coeff.q0 = parse_double("coefficients", "q", kv.take("coefficients", "q"));
    cfg.coeff.v1 = cfg.coeff.q1 = 0.0;
  } else {
    if (kv.has("coefficients", "v0"))
      cfg.coeff.v0 = parse_double("coefficients", "v0", kv.take("coefficients", "v0"));
    if (kv.has("coefficients", "v1"))
      cfg.coeff.v1 = parse_double("coefficients", "v1", kv.take("coefficients", "v1"));
    if (kv.has("coefficients", "q0"))
      cfg.coeff.q0 = parse_double("coefficients", "q0", kv.take("coefficients", "q0"));
    if (kv.has("coefficients", "q1"))
      cfg.coeff.q1 = parse_double("coefficients", "q1", kv.take("coefficients", "q1"));
  }
  if (kv.has("coefficients", "normalize_potential"))
    cfg.coeff.normalize =
        parse_bool("coefficients", "normalize_potential", kv.take("coefficients", "normalize_potential"));

  if (kv.has("solver", "tol")) cfg.solver.tol = parse_double("solver", "tol", kv.take("solver", "tol"));
  if (kv.has("solver", "max_iter"))
    cfg.solver.max_iter = static_cast<int>(parse_int("solver", "max_iter", kv.take("solver", "max_iter")));
  if (kv.has("solver", "newton_switch"))
    cfg.solver.newton_switch = parse_double("solver", "newton_switch", kv.take("solver", "newton_switch"));
  if (kv.has("solver", "stabilize_every"))
    cfg.solver.stabilize_every =
        static_cast<int>(parse_int("solver", "stabilize_every", kv.take("solver", "stabilize_every")));
  if (kv.has("solver", "r")) cfg.solver.r_attach = parse_double("solver", "r", kv.take("solver", "r"));
  if (kv.has("solver", "rho")) cfg.solver.rho = parse_double("solver", "rho", kv.take("solver", "rho"));

  if (kv.has("analysis", "q")) cfg.analysis_q = parse_double("analysis", "q", kv.take("analysis", "q"));
  if (kv.has("analysis", "decompose_R"))
    cfg.decompose_R = parse_double("analysis", "decompose_R", kv.take("analysis", "decompose_R"));
  if (kv.has("analysis", "threshold"))
    cfg.threshold = parse_double("analysis", "threshold", kv.take("analysis", "threshold"));
  if (kv.has("analysis", "field_in")) cfg.field_in = kv.take("analysis", "field_in");

  if (kv.has("output", "csv")) cfg.csv = parse_bool("output", "csv", kv.take("output", "csv"));

  // ---- cross-module validation at parse time ----
  PeriodicGrid grid;
  try {
    grid = build_grid(cfg.dim, cfg.L, cfg.M);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (cfg.kind == ExperimentConfig::Kind::blimit) {
    if (cfg.L_list.empty()) throw ConfigError("config: blimit needs grid.L_list");
    for (int L : cfg.L_list) {
      try {
        build_grid(cfg.dim, L, cfg.M);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: L_list entry ") + std::to_string(L) + ": " + e.what());
      }
    }
  }
  if (cfg.coeff.family == CoefficientSpec::Family::constant) {
    if (cfg.coeff.q0 <= 0.0)
      throw ConfigError("config: Q must be strictly positive everywhere, got q = " +
                        std::to_string(cfg.coeff.q0));
    if (cfg.coeff.v0 <= 0.0 && !cfg.coeff.normalize)
      throw ConfigError("config: min V <= 0 requires coefficients.normalize_potential = true");
  } else {
    double qmin = cfg.coeff.q0 - std::fabs(cfg.coeff.q1);
    if (qmin <= 0.0)
      throw ConfigError("config: Q must be strictly positive everywhere (min Q = " +
                        std::to_string(qmin) + ")");
    double vmin = cfg.coeff.v0 - std::fabs(cfg.coeff.v1);
    if (vmin <= 0.0 && !cfg.coeff.normalize)
      throw ConfigError("config: min V <= 0 requires coefficients.normalize_potential = true");
  }

  if (cfg.kind == ExperimentConfig::Kind::multibump) {
    if (!kv.has("glue", "centers")) throw ConfigError("config: multibump needs glue.centers");
    if (kv.has("glue", "R")) cfg.glue.R = parse_double("glue", "R", kv.take("glue", "R"));
    std::string cs = kv.take("glue", "centers");
    std::stringstream ss(cs);
    std::string point;
    while (std::getline(ss, point, ';')) {
      point = trim(point);
      if (point.empty()) continue;
      std::vector<double> coords = parse_coords("glue", "centers", point);
      if (static_cast<int>(coords.size()) != cfg.dim)
        throw ConfigError("config: glue.centers point '" + point + "' has " +
                          std::to_string(coords.size()) + " coordinates, expected " +
                          std::to_string(cfg.dim));
      std::array<double, 3> x{0.0, 0.0, 0.0};
      for (int d = 0; d < cfg.dim; ++d) x[d] = coords[d];
      cfg.glue.centers.push_back(snap_point(x, grid));
    }
    try {
      cfg.glue.validate(grid, 2);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } else if (kv.has("glue", "R")) {
    cfg.glue.R = parse_double("glue", "R", kv.take("glue", "R"));
  }

  if (cfg.kind == ExperimentConfig::Kind::decompose) {
    if (cfg.field_in.empty()) throw ConfigError("config: decompose needs analysis.field_in");
    if (!(cfg.threshold > 0.0)) throw ConfigError("config: analysis.threshold must be positive");
    if (cfg.decompose_R < 1.0) throw ConfigError("config: analysis.decompose_R must be >= 1");
  }
  {
    double two_star = cfg.dim == 3 ? 6.0 : std::numeric_limits<double>::infinity();
    if (!(cfg.analysis_q > 2.0 && cfg.analysis_q < two_star))
      throw ConfigError("config: analysis.q must lie in (2, 2*)");
  }

  // leftover keys that were parsed but belong to sections this experiment
  // ignores are fine; unknown keys were rejected above
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace logschro
