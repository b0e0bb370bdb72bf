#include "minorlab/tasks.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "minorlab/io.hpp"
#include "minorlab/rng.hpp"

namespace minorlab {

std::optional<std::string> criterion_for_task(const std::string& task) {
  static const std::map<std::string, std::string> m = {
      {"check", "AC-2"},    {"hormander", "AC-3"}, {"density", "AC-4"}, {"minorize", "AC-5"},
      {"mixing", "AC-6"},   {"timeavg", "AC-7"},   {"steinhaus", "AC-8"}, {"lev", "AC-9"},
      {"smallset", "AC-11"},
  };
  const auto it = m.find(task);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

namespace {

// Per-eps seed shared by every eps-indexed task.
std::uint64_t eps_seed(std::uint64_t seed, std::size_t e) { return derive_seed(seed, 0x5eed, e); }

std::vector<double> broadcast(std::vector<double> v, std::size_t d, const std::string& key) {
  if (v.size() == 1) v.assign(d, v[0]);
  if (v.size() != d) throw ConfigError(0, key + " needs 1 or " + std::to_string(d) + " values");
  return v;
}

GridSpec grid_from(const ExperimentConfig& cfg, std::size_t d) {
  GridSpec g;
  g.lo = broadcast(cfg.reals("grid_lo"), d, "grid_lo");
  g.hi = broadcast(cfg.reals("grid_hi"), d, "grid_hi");
  auto cells = cfg.uints("grid_cells");
  if (cells.size() == 1) cells.assign(d, cells[0]);
  if (cells.size() != d) throw ConfigError(0, "grid_cells needs 1 or " + std::to_string(d) + " values");
  g.cells.assign(cells.begin(), cells.end());
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return g;
}

std::vector<double> x0_from(const ExperimentConfig& cfg, std::size_t d) {
  if (!cfg.has("x0")) return std::vector<double>(d, 0.0);
  auto x = cfg.reals("x0");
  if (x.size() != d) throw ConfigError(0, "x0 needs " + std::to_string(d) + " coordinates");
  return x;
}

double dt_from(const ExperimentConfig& cfg, const ModelSpec& m) {
  const double dt = cfg.real("dt_phys");
  return dt > 0 ? dt : default_dt_phys(m);
}

std::string eps_file(const std::string& stem, std::size_t e) { return stem + "_eps" + std::to_string(e) + ".csv"; }

template <class F>
std::string render(F&& f) {
  std::ostringstream o;
  f(o);
  return o.str();
}

double min_masked_ci(const DensityGrid& g) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < g.counts.size(); ++c)
    if (g.hr_mask[c]) m = std::min(m, g.ci_lo[c]);
  return m;
}

DensityRun run_from(const ExperimentConfig& cfg, const ModelSpec& m, double eps, std::size_t e) {
  DensityRun run;
  run.eps = eps;
  run.t0 = cfg.real("t0");
  run.R = cfg.real("R");
  run.grid = grid_from(cfg, m.d);
  run.n_traj = cfg.uint("n_traj");
  run.seed = eps_seed(cfg.uint("seed"), e);
  run.dt_phys = dt_from(cfg, m);
  run.escape_level = cfg.real("escape_level");
  run.max_out_of_box = cfg.real("max_out_of_box");
  return run;
}

TaskResult task_check(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  AuditConfig ac;
  ac.box_halfwidth = cfg.rational("box_halfwidth");
  ac.run_certificate = cfg.flag("run_certificate");
  ac.cert.max_depth = static_cast<unsigned>(cfg.uint("max_depth"));
  ac.cert.eps_grid = cfg.rationals("eps_grid");
  ac.cert.threshold = cfg.rational("threshold");
  ac.cert.ratio_bound = cfg.rational("floor_ratio_bound");
  ac.cert.R = cfg.rational("sample_R");
  ac.cert.n_samples = cfg.uint("n_samples");
  ac.cert.seed = cfg.uint("seed");
  const AssumptionReport rep = check_assumptions(m, ac, cfg.uint("n_points"), cfg.uint("seed"));
  return {rep.passes, to_json(rep), {}};
}

TaskResult task_hormander(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  HormanderConfig hc;
  hc.eps_grid = cfg.rationals("eps_grid");
  hc.threshold = cfg.rational("threshold");
  hc.ratio_bound = cfg.rational("floor_ratio_bound");
  hc.R = cfg.rational("sample_R");
  hc.n_samples = cfg.uint("n_samples");
  hc.seed = cfg.uint("seed");
  const unsigned max_depth = static_cast<unsigned>(cfg.uint("max_depth"));
  Json scan = Json::array();
  std::optional<unsigned> first_pass;
  HormanderCertificate last;
  for (unsigned depth = 1; depth <= max_depth; ++depth) {
    hc.max_depth = depth;
    last = hormander_certificate(m, hc);
    scan.push_back({{"depth", depth},
                    {"passes", last.passes},
                    {"uniform_floor", last.uniform_floor},
                    {"n_deficient", last.deficiencies.size()}});
    if (last.passes && !first_pass) first_pass = depth;
  }
  Json j = to_json(last);
  j["depth_scan"] = scan;
  j["first_passing_depth"] = first_pass ? Json(*first_pass) : Json(nullptr);
  return {last.passes, j, {}};
}

TaskResult task_simulate(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  TaskResult out;
  out.passes = true;
  Json rows = Json::array();
  const auto eps_list = cfg.reals("eps_list");
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    SimConfig sc;
    sc.eps = eps_list[e];
    sc.t_end = cfg.real("t0");
    sc.dt_phys = dt_from(cfg, m);
    sc.n_traj = cfg.uint("n_traj");
    sc.seed = eps_seed(cfg.uint("seed"), e);
    sc.x0 = {x0_from(cfg, m.d)};
    sc.escape_level = cfg.real("escape_level");
    const EndpointSet es = simulate_ensemble(m, sc);
    const double frac = static_cast<double>(es.n_escaped()) / static_cast<double>(es.n_traj());
    const bool ok = frac < 1e-3;
    out.passes = out.passes && ok;
    const std::string file = eps_file("endpoints", e);
    out.files.emplace_back(file, render([&](std::ostream& o) { write_endpoints_csv(es, o); }));
    rows.push_back({{"eps", sc.eps},
                    {"seed", sc.seed},
                    {"dt_phys", sc.dt_phys},
                    {"n_escaped", es.n_escaped()},
                    {"escaped_fraction", frac},
                    {"config_hash", es.config_hash},
                    {"file", file},
                    {"passes", ok}});
  }
  out.report = {{"rows", rows}, {"escaped_fraction_bound", 1e-3}};
  return out;
}

TaskResult task_density(const ExperimentConfig& cfg, bool time_averaged) {
  const ModelSpec m = cfg.model();
  const auto x0 = x0_from(cfg, m.d);
  const bool oracle = cfg.flag("oracle");
  const double rel_tol = cfg.real("rel_tol");
  double alpha = 0;
  if (time_averaged) alpha = cfg.real("alpha") > 0 ? cfg.real("alpha") : default_alpha(m);
  TaskResult out;
  out.passes = true;
  Json rows = Json::array();
  const auto eps_list = cfg.reals("eps_list");
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const DensityRun run = run_from(cfg, m, eps_list[e], e);
    const DensityGrid g = time_averaged ? estimate_time_averaged(m, x0, alpha, run)
                                        : estimate_density_grid(m, {x0}, run).front();
    Json row = {{"eps", run.eps}, {"seed", run.seed}, {"dt_phys", run.dt_phys}};
    row["grid"] = density_summary(g);
    const double ci_min = min_masked_ci(g);
    bool ok = true;
    if (time_averaged) ok = ci_min > 0;
    if (oracle) {
      const auto avg = time_averaged
                           ? time_averaged_cell_averages(m, run.eps, x0, run.t0, alpha, run.grid)
                           : gaussian_cell_averages(gaussian_oracle(m, run.eps, run.t0, x0), run.grid);
      const OracleComparison cmp = compare_to_oracle(g, avg);
      row["oracle"] = to_json(cmp);
      ok = ok && cmp.max_rel_error <= rel_tol;
      if (!time_averaged) ok = ok && cmp.fraction_in_ci >= cfg.real("ci_fraction");
    } else if (!time_averaged) {
      ok = ci_min > 0;
    }
    const std::string file = eps_file(time_averaged ? "timeavg" : "density", e);
    out.files.emplace_back(file, render([&](std::ostream& o) { write_density_csv(g, o); }));
    row["file"] = file;
    row["passes"] = ok;
    out.passes = out.passes && ok;
    rows.push_back(row);
  }
  out.report = {{"x0", x0}, {"t0", cfg.real("t0")}, {"R", cfg.real("R")}, {"rows", rows}};
  if (time_averaged) out.report["alpha"] = alpha;
  if (oracle) {
    out.report["rel_tol"] = rel_tol;
    if (!time_averaged) out.report["ci_fraction"] = cfg.real("ci_fraction");
  }
  return out;
}

TaskResult task_minorize(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  SweepConfig sc;
  sc.R = cfg.real("R");
  sc.t0 = cfg.real("t0");
  sc.eps_list = cfg.reals("eps_list");
  sc.grid = grid_from(cfg, m.d);
  sc.start_fraction = cfg.real("start_fraction");
  sc.n_traj = cfg.uint("n_traj");
  sc.seed = cfg.uint("seed");
  sc.dt_phys = cfg.real("dt_phys");
  sc.ratio_bound = cfg.real("ratio_bound");
  sc.with_oracle = cfg.flag("oracle");
  const MinorizationReport rep = minorization_sweep(m, sc);
  TaskResult out;
  out.report = to_json(rep);
  out.passes = rep.passes;
  if (sc.with_oracle) {
    const double bound = cfg.real("oracle_ratio_bound");
    const bool oracle_ok = rep.oracle_ratio && *rep.oracle_ratio <= bound;
    out.report["oracle_ratio_bound"] = bound;
    out.report["oracle_passes"] = oracle_ok;
    out.passes = out.passes && oracle_ok;
  }
  out.files.emplace_back("sweep.csv", render([&](std::ostream& o) { write_sweep_csv(rep, o); }));
  return out;
}

TaskResult task_mixing(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  const double t_max = cfg.real("t_max"), t_step = cfg.real("t_step");
  std::vector<double> t_grid;
  for (std::size_t k = 1; static_cast<double>(k) * t_step <= t_max * (1 + 1e-12); ++k)
    t_grid.push_back(static_cast<double>(k) * t_step);
  if (t_grid.empty()) throw ConfigError(0, "t_step exceeds t_max");
  const MixingReport rep = mixing_time(m, cfg.reals("eps_list"), t_grid, x0_from(cfg, m.d), cfg.real("tv_threshold"),
                                       cfg.uint("quad_n"));
  TaskResult out;
  out.report = to_json(rep);
  out.report["spread_bound"] = cfg.real("spread_bound");
  out.passes = rep.spread <= cfg.real("spread_bound");
  out.files.emplace_back("mixing.csv", render([&](std::ostream& o) { write_mixing_csv(rep, t_grid, o); }));
  return out;
}

TaskResult task_steinhaus(const ExperimentConfig& cfg) {
  const Rational L = cfg.rational("L"), eta = cfg.rational("eta");
  if (eta > L) throw ConfigError(0, "eta must not exceed L");
  const SteinhausSweep s = steinhaus_sweep(cfg.uint("n_sets"), L, eta, cfg.uint("seed"));
  Json j = {{"n_sets", s.n_sets},
            {"L", to_string(L)},
            {"eta", to_string(eta)},
            {"n", s.n},
            {"failures", s.failures},
            {"max_sumset_intervals", s.max_sumset_intervals}};
  j["first_failure"] = s.first_failure ? Json(*s.first_failure) : Json(nullptr);
  return {s.failures == 0, j, {}};
}

TaskResult task_lev(const ExperimentConfig& cfg) {
  const LevSweep s = lev_exhaustive(static_cast<long>(cfg.uint("max_element")));
  Json j = {{"max_element", s.max_element},
            {"n_subsets", s.n_subsets},
            {"n_admissible", s.n_admissible},
            {"failures", s.failures},
            {"failing", s.failing}};
  return {s.failures == 0 && s.n_admissible > 0, j, {}};
}

TaskResult task_smallset(const ExperimentConfig& cfg) {
  const std::string kernel = cfg.str("kernel");
  const long max_time = static_cast<long>(cfg.uint("max_time"));
  KernelFamily k;
  if (kernel == "lazy_walk") {
    k = lazy_walk_fixture(cfg.uint("n_states"), cfg.rational("jitter"), max_time);
  } else if (kernel == "disconnected") {
    k = disconnected_fixture(max_time);
  } else {
    std::ifstream in(kernel);
    if (!in) throw ConfigError(0, "cannot read kernel CSV " + kernel);
    try {
      k = load_kernel_csv(in);
    } catch (const std::exception& e) {
      throw ConfigError(0, "kernel CSV " + kernel + ": " + e.what());
    }
  }
  SmallSetConfig sc;
  sc.R = cfg.rational("level_R");
  if (cfg.has("c_R")) sc.c_R = cfg.rational("c_R");
  if (cfg.has("C_R")) sc.C_R = cfg.rational("C_R");
  sc.prefer_direct = cfg.flag("prefer_direct");
  TaskResult out;
  if (cfg.flag("dump_kernel")) out.files.emplace_back("kernel.csv", render([&](std::ostream& o) { write_kernel_csv(k, o); }));
  try {
    const SmallSetResult r = small_set_pipeline(k, sc);
    out.report = to_json(r);
    out.passes = r.verified && sgn(r.lambda) > 0;
  } catch (const PipelineError& e) {
    out.report = to_json(e.partial());
    out.report["failure"] = {{"kind", e.kind()}, {"message", e.what()}};
    out.passes = false;
  }
  out.report["kernel"] = {{"source", kernel}, {"n_states", k.n_states}, {"times", k.times}};
  return out;
}

TaskResult task_polytope(const ExperimentConfig& cfg) {
  const ModelSpec m = cfg.model();
  const std::size_t d = cfg.uint("d");
  const double S = cfg.real("S");
  const std::size_t N = cfg.uint("N");
  if (N < d + 1) throw ConfigError(0, "polytope needs N >= d + 1");
  std::vector<double> v(d, 0.0);
  v[d - 1] = 1.0;
  if (cfg.has("direction")) v = broadcast(cfg.reals("direction"), d, "direction");
  const PolytopeSample P = sample_polytope(d, S, N, cfg.uint("seed"));
  TaskResult out;
  out.passes = true;
  Json j = {{"d", d}, {"S", S}, {"N", N}, {"direction", v}};
  if (d <= 3) {
    const TransversalityReport t = transversality_check(P, v);
    j["transversality"] = to_json(t);
    out.passes = out.passes && t.all_transverse;
  }
  if (d == 2) {
    const double h = hausdorff_probe_2d(P, cfg.uint("n_probes"));
    j["hausdorff_probe"] = h;
    j["hausdorff_bound"] = cfg.real("hausdorff_bound");
    out.passes = out.passes && h < cfg.real("hausdorff_bound");
  }
  const double R = cfg.real("R");
  if (R > 0) {
    if (m.d != d) throw ConfigError(0, "polytope d does not match the model dimension");
    const SublevelContainment c = hull_contains_sublevel(P, m.H, R, cfg.uint("n_probes"), cfg.uint("seed"));
    j["sublevel"] = {{"R", R}, {"n_probes", c.n_probes}, {"n_inside", c.n_inside}, {"contained", c.contained}};
    if (c.first_outside) j["sublevel"]["first_outside"] = *c.first_outside;
    out.passes = out.passes && c.contained;
  }
  out.report = j;
  return out;
}

Json config_echo(const ExperimentConfig& cfg) {
  Json j;
  j["task"] = cfg.task;
  j["output"] = cfg.output.string();
  if (!cfg.family.empty()) {
    Json model;
    model["family"] = cfg.family;
    for (const auto& [k, v] : cfg.model_params) model[k] = v;
    j["model"] = model;
  }
  Json run;
  for (const auto& [k, v] : cfg.run) run[k] = v;
  j["run"] = run;
  return j;
}

}  // namespace

TaskResult execute_task(const ExperimentConfig& cfg) {
  const std::string& t = cfg.task;
  try {
    if (t == "check") return task_check(cfg);
    if (t == "hormander") return task_hormander(cfg);
    if (t == "simulate") return task_simulate(cfg);
    if (t == "density") return task_density(cfg, false);
    if (t == "timeavg") return task_density(cfg, true);
    if (t == "minorize") return task_minorize(cfg);
    if (t == "mixing") return task_mixing(cfg);
    if (t == "steinhaus") return task_steinhaus(cfg);
    if (t == "lev") return task_lev(cfg);
    if (t == "smallset") return task_smallset(cfg);
    if (t == "polytope") return task_polytope(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  } catch (const std::runtime_error& e) {
    // Simulation, coverage, LP and convergence failures.
    TaskResult out;
    out.passes = false;
    out.report = {{"failure", {{"kind", "runtime"}, {"message", e.what()}}}};
    return out;
  }
  throw ConfigError(0, "unknown task " + t);
}

int run_experiment(const ExperimentConfig& cfg) {
  const TaskResult r = execute_task(cfg);
  Json j;
  j["task"] = cfg.task;
  const auto crit = criterion_for_task(cfg.task);
  j["criterion"] = crit ? Json(*crit) : Json(nullptr);
  j["passes"] = r.passes;
  Json files = Json::array();
  for (const auto& f : r.files) files.push_back(f.first);
  j["outputs"] = files;
  j["config"] = config_echo(cfg);
  j["report"] = r.report;
  // Single-threaded writes; the JSON goes last so a listed output always exists.
  for (const auto& [name, content] : r.files) atomic_write(cfg.output / name, content);
  atomic_write(cfg.output / (cfg.task + ".json"), j.dump(2) + "\n");
  return r.passes ? kExitPass : kExitFail;
}

}  // namespace minorlab
