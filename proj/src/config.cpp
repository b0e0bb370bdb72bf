#include "minorlab/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace minorlab {

const char* key_type_name(KeyType t) {
  switch (t) {
    case KeyType::String: return "string";
    case KeyType::Bool: return "bool";
    case KeyType::UInt: return "uint";
    case KeyType::Real: return "real";
    case KeyType::RealList: return "real_list";
    case KeyType::UIntList: return "uint_list";
    case KeyType::Rational: return "rational";
    case KeyType::RationalList: return "rational_list";
  }
  return "?";
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> t = {"check",    "hormander", "simulate", "density", "timeavg", "minorize",
                                             "mixing",   "steinhaus", "lev",      "smallset", "polytope"};
  return t;
}

bool task_needs_model(const std::string& task) {
  return task != "steinhaus" && task != "lev" && task != "smallset";
}

namespace {

using T = std::vector<std::string>;

const T kGridTasks = {"density", "timeavg", "minorize"};
const T kSimTasks = {"simulate", "density", "timeavg", "minorize"};

KeySpec key(std::string section, std::string name, KeyType type, std::optional<std::string> fallback, T tasks,
            std::string doc) {
  KeySpec k;
  k.section = std::move(section);
  k.key = std::move(name);
  k.type = type;
  k.fallback = std::move(fallback);
  k.tasks = std::move(tasks);
  k.doc = std::move(doc);
  return k;
}

KeySpec ranged(KeySpec k, std::optional<double> lo, bool lo_open, std::optional<double> hi = std::nullopt,
               bool hi_open = false) {
  k.lo = lo;
  k.lo_open = lo_open;
  k.hi = hi;
  k.hi_open = hi_open;
  return k;
}

KeySpec optional_key(KeySpec k) {
  k.optional = true;
  return k;
}

std::vector<KeySpec> build_schema() {
  std::vector<KeySpec> s;
  auto task = key("experiment", "task", KeyType::String, std::nullopt, {}, "task to run");
  task.choices = task_names();
  s.push_back(task);
  s.push_back(key("experiment", "output", KeyType::String, std::nullopt, {}, "output directory"));

  s.push_back(ranged(key("run", "seed", KeyType::UInt, "1", {}, "root seed for every random stream"), 0, false));

  // Simulation and density runs.
  s.push_back(ranged(key("run", "eps_list", KeyType::RealList, std::nullopt,
                         {"simulate", "density", "timeavg", "minorize", "mixing"}, "noise levels, each in (0,1)"),
                     0, true, 1, true));
  s.push_back(ranged(key("run", "t0", KeyType::Real, "2", kSimTasks, "rescaled time (simulate: horizon)"), 0, true));
  s.push_back(ranged(key("run", "R", KeyType::Real, "1", {"density", "timeavg", "minorize", "polytope"},
                         "sublevel H_R defining hr_mask (polytope: 0 skips the containment probe)"),
                     0, false));
  s.push_back(key("run", "grid_lo", KeyType::RealList, std::nullopt, kGridTasks,
                  "lower box corner; one value is broadcast to every axis"));
  s.push_back(key("run", "grid_hi", KeyType::RealList, std::nullopt, kGridTasks, "upper box corner"));
  s.push_back(ranged(key("run", "grid_cells", KeyType::UIntList, std::nullopt, kGridTasks, "cells per axis"), 1,
                     false));
  s.push_back(ranged(key("run", "n_traj", KeyType::UInt, "100000", kSimTasks, "trajectories per start"), 1, false));
  s.push_back(ranged(key("run", "dt_phys", KeyType::Real, "0", kSimTasks, "physical step; 0 selects the model default"),
                     0, false));
  s.push_back(optional_key(key("run", "x0", KeyType::RealList, std::nullopt,
                               {"simulate", "density", "timeavg", "mixing"}, "start point; default the origin")));
  s.push_back(ranged(key("run", "escape_level", KeyType::Real, "10000", {"simulate", "density", "timeavg"}, "H level flagged as escape"), 0,
                     true));
  s.push_back(ranged(key("run", "max_out_of_box", KeyType::Real, "0.01", {"density", "timeavg"},
                         "largest tolerated out-of-box fraction"),
                     0, false, 1, false));
  s.push_back(key("run", "oracle", KeyType::Bool, "false", kGridTasks, "compare against the Gaussian oracle"));
  s.push_back(ranged(key("run", "rel_tol", KeyType::Real, "0.15", {"density", "timeavg"},
                         "oracle relative error bound on hr_mask cells"),
                     0, true));
  s.push_back(ranged(key("run", "ci_fraction", KeyType::Real, "0.93", {"density"},
                         "required fraction of oracle values inside the 95% CI"),
                     0, false, 1, false));
  s.push_back(ranged(key("run", "alpha", KeyType::Real, "0", {"timeavg"}, "random-time rate; 0 selects inf div Z"), 0,
                     false));
  s.push_back(ranged(key("run", "start_fraction", KeyType::Real, "0.9", {"minorize"},
                         "start lattice fills H <= start_fraction R"),
                     0, true, 1, false));
  s.push_back(ranged(key("run", "ratio_bound", KeyType::Real, "3", {"minorize"}, "max lambda_hat / min lambda_hat"),
                     1, false));
  s.push_back(ranged(key("run", "oracle_ratio_bound", KeyType::Real, "2", {"minorize"},
                         "target max/min of the oracle sweep (with oracle = true)"),
                     1, false));

  // Audit and certificate.
  s.push_back(ranged(key("run", "n_points", KeyType::UInt, "10000", {"check"}, "seeded audit points"), 0, false));
  s.push_back(ranged(key("run", "box_halfwidth", KeyType::Rational, "10", {"check"}, "audit box [-b,b]^d"), 0, true));
  s.push_back(key("run", "run_certificate", KeyType::Bool, "true", {"check"}, "include the bracket certificate"));
  s.push_back(ranged(key("run", "max_depth", KeyType::UInt, "3", {"check", "hormander"}, "bracket depth"), 1, false, 6,
                     false));
  s.push_back(ranged(key("run", "eps_grid", KeyType::RationalList, "1/1000, 1/100, 1/10, 999/1000",
                         {"check", "hormander"}, "certificate noise levels in (0,1)"),
                     0, true, 1, true));
  s.push_back(ranged(key("run", "threshold", KeyType::Rational, "1/1000000", {"check", "hormander"},
                         "uniform floor threshold"),
                     0, true));
  s.push_back(ranged(key("run", "floor_ratio_bound", KeyType::Rational, "1000", {"check", "hormander"},
                         "bound on max/min per-eps floor"),
                     1, false));
  s.push_back(ranged(key("run", "sample_R", KeyType::Rational, "1", {"check", "hormander"},
                         "certificate samples lie in H < sample_R"),
                     0, true));
  s.push_back(ranged(key("run", "n_samples", KeyType::UInt, "64", {"check", "hormander"}, "certificate sample count"),
                     1, false));

  // Mixing.
  s.push_back(ranged(key("run", "t_max", KeyType::Real, "10", {"mixing"}, "last rescaled grid time"), 0, true));
  s.push_back(ranged(key("run", "t_step", KeyType::Real, "0.01", {"mixing"}, "rescaled grid spacing"), 0, true));
  s.push_back(ranged(key("run", "tv_threshold", KeyType::Real, "0.25", {"mixing"}, "TV level defining t_mix"), 0, true,
                     1, true));
  s.push_back(ranged(key("run", "quad_n", KeyType::UInt, "400", {"mixing"}, "TV quadrature points per axis"), 10,
                     false));
  s.push_back(ranged(key("run", "spread_bound", KeyType::Real, "1.3", {"mixing"}, "max/min rescaled t_mix"), 1, false));

  // Markov-kit.
  s.push_back(ranged(key("run", "n_sets", KeyType::UInt, "100", {"steinhaus"}, "random interval unions"), 1, false));
  s.push_back(ranged(key("run", "L", KeyType::Rational, "3", {"steinhaus"}, "sets lie in [0, L]"), 0, true));
  s.push_back(ranged(key("run", "eta", KeyType::Rational, "1/2", {"steinhaus"}, "measure lower bound"), 0, true));
  s.push_back(ranged(key("run", "max_element", KeyType::UInt, "8", {"lev"}, "B ranges over subsets of {0..max}"), 1,
                     false, 20, false));
  s.push_back(key("run", "kernel", KeyType::String, "lazy_walk", {"smallset"},
                  "lazy_walk, disconnected, or a path to a t,i,j,p CSV"));
  s.push_back(ranged(key("run", "n_states", KeyType::UInt, "50", {"smallset"}, "lazy_walk size"), 2, false));
  s.push_back(ranged(key("run", "jitter", KeyType::Rational, "1/1000", {"smallset"}, "lazy_walk uniform mixing weight"),
                     0, false, 1, false));
  s.push_back(ranged(key("run", "max_time", KeyType::UInt, "10", {"smallset"}, "fixture times 1..max_time"), 1, false));
  s.push_back(ranged(key("run", "level_R", KeyType::Rational, "1", {"smallset"}, "H_R = states with level < level_R"),
                     0, true));
  s.push_back(optional_key(
      ranged(key("run", "c_R", KeyType::Rational, std::nullopt, {"smallset"}, "petite constant; measured when absent"),
             0, true)));
  s.push_back(optional_key(
      ranged(key("run", "C_R", KeyType::Rational, std::nullopt, {"smallset"}, "entry bound; measured when absent"), 0,
             true)));
  s.push_back(key("run", "dump_kernel", KeyType::Bool, "false", {"smallset"}, "also write the family as kernel.csv"));
  s.push_back(key("run", "prefer_direct", KeyType::Bool, "true", {"smallset"},
                  "use a single family time when it is already positive on H_R x H_R"));

  // Geometry.
  s.push_back(ranged(key("run", "d", KeyType::UInt, "2", {"polytope"}, "dimension"), 2, false));
  s.push_back(ranged(key("run", "S", KeyType::Real, "2", {"polytope"}, "sphere radius"), 0, true));
  s.push_back(ranged(key("run", "N", KeyType::UInt, "200", {"polytope"}, "vertices"), 3, false));
  s.push_back(optional_key(key("run", "direction", KeyType::RealList, std::nullopt, {"polytope"},
                               "noise direction; default the last axis")));
  s.push_back(ranged(key("run", "n_probes", KeyType::UInt, "1000", {"polytope"}, "boundary probes"), 1, false));
  s.push_back(ranged(key("run", "hausdorff_bound", KeyType::Real, "0.1", {"polytope"}, "2-d probe distance bound"), 0,
                     true));
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

double parse_real(const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw std::invalid_argument("'" + v + "' is not a finite real");
  return x;
}

std::uint64_t parse_uint(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("'" + v + "' is not a nonnegative integer");
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw std::invalid_argument("'" + v + "' overflows");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("'" + v + "' is not a bool");
}

void check_range(const KeySpec& k, double x) {
  auto fmt = [](double y) {
    std::ostringstream o;
    o << y;
    return o.str();
  };
  const bool below = k.lo && (k.lo_open ? x <= *k.lo : x < *k.lo);
  const bool above = k.hi && (k.hi_open ? x >= *k.hi : x > *k.hi);
  if (below || above) {
    std::string range = (k.lo_open ? "(" : "[") + (k.lo ? fmt(*k.lo) : "-inf") + ", " + (k.hi ? fmt(*k.hi) : "inf") +
                        (k.hi_open ? ")" : "]");
    throw std::invalid_argument(k.key + " = " + fmt(x) + " outside " + range);
  }
}

// Parses and range-checks; throws std::invalid_argument.
void validate_value(const KeySpec& k, const std::string& v) {
  switch (k.type) {
    case KeyType::String:
      if (v.empty()) throw std::invalid_argument(k.key + " is empty");
      if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end())
        throw std::invalid_argument("unknown " + k.key + " '" + v + "'");
      return;
    case KeyType::Bool: parse_bool(v); return;
    case KeyType::UInt: check_range(k, static_cast<double>(parse_uint(v))); return;
    case KeyType::Real: check_range(k, parse_real(v)); return;
    case KeyType::Rational: check_range(k, to_double(parse_rational(v))); return;
    case KeyType::RealList:
    case KeyType::UIntList:
    case KeyType::RationalList: {
      const auto parts = split_list(v);
      if (parts.empty() || (parts.size() == 1 && parts[0].empty())) throw std::invalid_argument(k.key + " is empty");
      for (const auto& p : parts) {
        if (k.type == KeyType::RealList)
          check_range(k, parse_real(p));
        else if (k.type == KeyType::UIntList)
          check_range(k, static_cast<double>(parse_uint(p)));
        else
          check_range(k, to_double(parse_rational(p)));
      }
      return;
    }
  }
}

bool applies(const KeySpec& k, const std::string& task) {
  return k.tasks.empty() || std::find(k.tasks.begin(), k.tasks.end(), task) != k.tasks.end();
}

const KeySpec* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : config_schema())
    if (k.section == section && k.key == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> s = build_schema();
  return s;
}

std::string ExperimentConfig::str(const std::string& key) const {
  const auto it = run.find(key);
  if (it == run.end()) throw ConfigError(0, "missing run key " + key);
  return it->second;
}
bool ExperimentConfig::flag(const std::string& key) const { return parse_bool(str(key)); }
std::uint64_t ExperimentConfig::uint(const std::string& key) const { return parse_uint(str(key)); }
double ExperimentConfig::real(const std::string& key) const { return parse_real(str(key)); }
std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(str(key))) out.push_back(parse_real(p));
  return out;
}
std::vector<std::uint64_t> ExperimentConfig::uints(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& p : split_list(str(key))) out.push_back(parse_uint(p));
  return out;
}
Rational ExperimentConfig::rational(const std::string& key) const { return parse_rational(str(key)); }
std::vector<Rational> ExperimentConfig::rationals(const std::string& key) const {
  std::vector<Rational> out;
  for (const auto& p : split_list(str(key))) out.push_back(parse_rational(p));
  return out;
}

ModelSpec ExperimentConfig::model() const {
  if (family.empty()) throw ConfigError(0, "task " + task + " needs a [model] section");
  return build_model(family, model_params);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::pair<std::string, std::size_t>> experiment, run, model;
  std::set<std::string> seen_sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "model" && section != "run")
        throw ConfigError(lineno, "unknown section [" + section + "]");
      if (!seen_sections.insert(section).second) throw ConfigError(lineno, "duplicate section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected key = value");
    if (section.empty()) throw ConfigError(lineno, "key outside any section");
    const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) throw ConfigError(lineno, "empty key");
    auto& target = section == "experiment" ? experiment : section == "run" ? run : model;
    if (target.count(k)) {
      throw ConfigError(lineno, "duplicate key " + k + " (first set on line " + std::to_string(target[k].second) + ")");
    }
    target[k] = {v, lineno};
  }

  for (const auto& [k, v] : experiment) {
    const KeySpec* spec = find_key("experiment", k);
    if (!spec) throw ConfigError(v.second, "unknown key " + k + " in [experiment]");
    try {
      validate_value(*spec, v.first);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(v.second, e.what());
    }
  }
  if (!experiment.count("task")) throw ConfigError(0, "[experiment] task is required");
  if (!experiment.count("output")) throw ConfigError(0, "[experiment] output is required");
  cfg.task = experiment["task"].first;
  cfg.output = experiment["output"].first;

  if (!model.empty()) {
    if (!model.count("family")) throw ConfigError(model.begin()->second.second, "[model] needs family");
    cfg.family = model["family"].first;
    const auto& fams = model_families();
    if (std::find(fams.begin(), fams.end(), cfg.family) == fams.end())
      throw ConfigError(model["family"].second, "unknown model family '" + cfg.family + "'");
    const auto keys = model_param_keys(cfg.family);
    for (const auto& [k, v] : model) {
      if (k == "family") continue;
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ConfigError(v.second, "unknown key " + k + " for model family " + cfg.family);
      cfg.model_params[k] = v.first;
    }
    try {
      build_model(cfg.family, cfg.model_params);
    } catch (const std::exception& e) {
      // Point at the earliest parameter the message names, else at family.
      const std::string msg = e.what();
      int line = model["family"].second;
      std::size_t best = std::string::npos;
      for (const auto& [k, v] : model) {
        if (k == "family") continue;
        const std::regex word("(^|[^A-Za-z0-9_])" + k + "($|[^A-Za-z0-9_])");
        std::smatch m;
        if (std::regex_search(msg, m, word) && std::size_t(m.position(0)) < best) {
          best = m.position(0);
          line = v.second;
        }
      }
      throw ConfigError(line, "model: " + msg);
    }
  } else if (task_needs_model(cfg.task)) {
    throw ConfigError(0, "task " + cfg.task + " needs a [model] section");
  }

  for (const auto& [k, v] : run) {
    const KeySpec* spec = find_key("run", k);
    if (!spec) throw ConfigError(v.second, "unknown key " + k + " in [run]");
    if (!applies(*spec, cfg.task)) throw ConfigError(v.second, "key " + k + " does not apply to task " + cfg.task);
    try {
      validate_value(*spec, v.first);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(v.second, e.what());
    }
    cfg.run[k] = v.first;
  }
  for (const auto& spec : config_schema()) {
    if (spec.section != "run" || !applies(spec, cfg.task) || cfg.run.count(spec.key)) continue;
    if (spec.fallback)
      cfg.run[spec.key] = *spec.fallback;
    else if (!spec.optional)
      throw ConfigError(0, "task " + cfg.task + " requires [run] " + spec.key);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string schema_json() {
  nlohmann::ordered_json j;
  j["sections"] = {"experiment", "model", "run"};
  j["tasks"] = task_names();
  nlohmann::ordered_json models;
  for (const auto& f : model_families()) models[f] = model_param_keys(f);
  j["model_families"] = models;
  nlohmann::ordered_json keys = nlohmann::ordered_json::array();
  for (const auto& k : config_schema()) {
    nlohmann::ordered_json e;
    e["section"] = k.section;
    e["key"] = k.key;
    e["type"] = key_type_name(k.type);
    if (k.fallback)
      e["default"] = *k.fallback;
    else
      e["required"] = !k.optional;
    if (k.lo) e[k.lo_open ? "gt" : "ge"] = *k.lo;
    if (k.hi) e[k.hi_open ? "lt" : "le"] = *k.hi;
    if (!k.choices.empty()) e["choices"] = k.choices;
    e["tasks"] = k.tasks.empty() ? nlohmann::ordered_json("all") : nlohmann::ordered_json(k.tasks);
    e["doc"] = k.doc;
    keys.push_back(e);
  }
  j["keys"] = keys;
  return j.dump(2) + "\n";
}

}  // namespace minorlab
