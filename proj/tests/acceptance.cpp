// Acceptance runner: one PASS/FAIL line per criterion AC-1..AC-11.
//
//   acceptance            run every criterion
//   acceptance --ac 5     run one
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "minorlab/audit.hpp"
#include "minorlab/density.hpp"
#include "minorlab/hormander.hpp"
#include "minorlab/markov.hpp"
#include "minorlab/models.hpp"
#include "minorlab/smallset.hpp"
#include "minorlab/symbolic.hpp"

using namespace minorlab;
using symbolic::lie_bracket;
using symbolic::parse_field;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok " : "FAILED ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt_g(double a) { return fmt("%.6g", a); }

ModelSpec langevin(std::size_t n) { return build_model("langevin", {{"n", std::to_string(n)}}); }

ModelSpec lorenz(std::size_t d, const std::string& eta = "") {
  std::string lam, sig;
  for (std::size_t i = 0; i < d; ++i) {
    const bool driven = i == 0 || i == 2;
    lam += std::string(i ? ", " : "") + (driven ? "1" : "0");
    sig += std::string(i ? ", " : "") + (driven ? "1" : "0");
  }
  ModelParams p = {{"d", std::to_string(d)}, {"lambda", lam}, {"sigma", sig}};
  if (!eta.empty()) p["eta"] = eta;
  return build_model("lorenz96", p);
}

// ---- AC-1: exact bracket identities ----

Outcome ac1() {
  Outcome o;
  o.require(lie_bracket(parse_field("d/dv1", 2), parse_field("v1*d/dx1 - eps*v1*d/dv1", 2)) ==
                parse_field("d/dx1 - eps*d/dv1", 2),
            "[X1, X0] = d/dx - eps d/dv on the kinetic example");

  for (std::size_t n = 1; n <= 3; ++n) {
    ModelSpec m = langevin(n);
    bool all = true;
    for (std::size_t j = 0; j < n; ++j) {
      const VectorField want = VectorField::basis(2 * n, j) - PolyExpr::eps(2 * n) * VectorField::basis(2 * n, n + j);
      all = all && lie_bracket(m.Zs[j].field, m.drift()) == want;
    }
    o.require(all, "Langevin n=" + std::to_string(n) + ": [Z_j, -eps Z + Z0] = d/dx_j - eps d/dv_j for every j");
  }

  for (std::size_t d = 4; d <= 8; ++d) {
    ModelSpec m = lorenz(d);
    const VectorField b = lie_bracket(m.Zs[2].field, lie_bracket(m.Zs[0].field, m.drift()));
    // For d = 4 the x_{d-1} d/dx_d term of [Z1, drift] is x3 d/dx4 and survives the outer bracket.
    const VectorField want = d == 4 ? parse_field("d/dx2 + d/dx4", 4) : VectorField::basis(d, 1);
    o.require(b == want, "Lorenz96 d=" + std::to_string(d) + ": [Z3,[Z1, -eps Z + Z0]] = sigma1 sigma3 " +
                             (d == 4 ? std::string("(d/dx2 + d/dx4)") : std::string("d/dx2")));
    bool chain = true;
    for (std::size_t k = 1; k < d; ++k)
      chain = chain && lie_bracket(VectorField::basis(d, k), lie_bracket(VectorField::basis(d, k - 1), m.drift())) ==
                           -VectorField::basis(d, (k + 1) % d);
    o.require(chain, "Lorenz96 d=" + std::to_string(d) + ": [d_k,[d_{k-1}, -eps Z + Z0]] = -d_{k+1} for all k");
  }

  ModelSpec osc = build_model("oscillator_chain", {{"n", "2"}, {"k", "1"}, {"j", "1"}});
  o.require(symbolic::ad_power(VectorField::basis(4, 0), osc.Z0, 1) ==
                Rational(-4) * VectorField::basis(4, 2) + Rational(2) * VectorField::basis(4, 3),
            "oscillator n=2, j=k=1: ad(d/dx1)(Z0) = -4 d/dv1 + 2 d/dv2");
  return o;
}

// ---- AC-2: assumption audit ----

Outcome ac2() {
  Outcome o;
  AuditConfig cfg;
  cfg.run_certificate = false;
  const std::vector<std::pair<std::string, ModelSpec>> models = {
      {"langevin n=1 U=x^2/2", build_model("langevin", {{"n", "1"}, {"U", "x1^2/2"}})},
      {"langevin_aniso n=2 T=(1,2)", build_model("langevin_aniso", {{"n", "2"}, {"T", "1, 2"}})},
      {"oscillator_chain n=3 T=(1,2)",
       build_model("oscillator_chain", {{"n", "3"}, {"k", "1"}, {"j", "1"}, {"T1", "1"}, {"Tn", "2"}})},
      {"lorenz96 d=4", lorenz(4)},
      {"fluid_generic d=4", build_model("fluid_generic", {{"d", "4"}, {"lambda", "1, 1, 1, 1"}})},
  };
  for (const auto& [label, m] : models) {
    const AssumptionReport r = check_assumptions(m, cfg, 10000, 1);
    bool exact = r.aborted.empty() && r.v3_conserves.holds;
    for (const auto& c : r.v2_div_zero) exact = exact && c.holds;
    o.require(exact && r.v2_divZ.passes && r.v4.passes && sgn(r.v4.worst1.margin) >= 0 &&
                  sgn(r.v4.worst2.margin) >= 0 && r.passes,
              label + " (eta=" + to_string(m.eta) + "): V2/V3 exact, V4 min margins " + to_string(r.v4.worst1.margin) +
                  ", " + to_string(r.v4.worst2.margin) + " over " + std::to_string(r.v4.n_points) + " points");
  }
  const AssumptionReport bad = check_assumptions(lorenz(4, "1"), cfg, 10000, 3);
  bool witness = bad.v4.first_violation && bad.v4.first_violation_inequality == 1 &&
                 bad.v4.first_violation->x == std::vector<Rational>{Rational(10), Rational(0), Rational(0), Rational(0)} &&
                 bad.v4.first_violation->lhs == 400 && bad.v4.first_violation->rhs == 204;
  o.require(!bad.passes && witness, "lorenz96 with eta=1 fails V4 at x=(10,0,0,0): 400 > 204");
  return o;
}

// ---- AC-3: Hörmander certificates ----

Outcome ac3() {
  Outcome o;
  HormanderConfig cfg;
  cfg.max_depth = 2;
  for (std::size_t n = 1; n <= 3; ++n) {
    const HormanderCertificate c = hormander_certificate(langevin(n), cfg);
    o.require(c.passes && c.deficiencies.empty() && c.uniform_floor >= 0.1 && c.floor_ratio <= 10,
              "Langevin n=" + std::to_string(n) + " depth 2: uniform_floor " + fmt_g(c.uniform_floor) +
                  " (>= 0.1), floor ratio " + fmt_g(c.floor_ratio) + " (<= 10)");
  }
  const ModelSpec m = lorenz(4);
  const HormanderCertificate c2 = hormander_certificate(m, cfg);
  std::string rank = c2.deficiencies.empty() ? "none" : std::to_string(c2.deficiencies.front().rank);
  o.require(!c2.passes && !c2.deficiencies.empty(),
            "Lorenz96 d=4 fails at depth 2 (" + std::to_string(c2.deficiencies.size()) +
                " deficient (eps, x) pairs, first rank " + rank + " < 4)");
  HormanderConfig k3 = cfg;
  k3.max_depth = 3;
  const HormanderCertificate c3 = hormander_certificate(m, k3);
  o.require(c3.passes, "Lorenz96 d=4 passes at depth 3 (" + std::to_string(c3.deficiencies.size()) +
                           " deficient pairs; the samples include the origin, where the depth-3 span has rank " +
                           (c3.deficiencies.empty() ? std::string("4") : std::to_string(c3.deficiencies.front().rank)) +
                           ")");
  for (unsigned depth = 4; depth <= 6; ++depth) {
    HormanderConfig k = cfg;
    k.max_depth = depth;
    if (hormander_certificate(m, k).passes) {
      o.note("Lorenz96 d=4 first passing depth: " + std::to_string(depth));
      break;
    }
  }
  return o;
}

// ---- AC-4: density against the Gaussian oracle ----

Outcome ac4() {
  Outcome o;
  const ModelSpec m = langevin(1);
  DensityRun run;
  run.eps = 0.1;
  run.t0 = 2.0;
  run.R = 1.0;
  run.grid = GridSpec::cube(2, -3.0, 3.0, 40);
  run.n_traj = 1000000;
  run.seed = 4;
  run.dt_phys = 0.02;
  const auto grids = estimate_density_grid(m, {{0.0, 0.0}}, run);
  const auto oracle = gaussian_cell_averages(gaussian_oracle(m, run.eps, run.t0, {0.0, 0.0}), run.grid);
  const OracleComparison c = compare_to_oracle(grids[0], oracle);
  o.note(std::to_string(c.n_masked) + " hr_mask cells, out-of-box fraction " + fmt_g(grids[0].out_of_box_fraction()));
  o.require(c.max_rel_error <= 0.15, "max relative error " + fmt_g(c.max_rel_error) + " (<= 0.15) at cell " +
                                         std::to_string(c.worst_cell));
  o.require(c.fraction_in_ci >= 0.93, "oracle inside the 95% CI on " + fmt_g(100 * c.fraction_in_ci) +
                                          "% of masked cells (>= 93%)");
  return o;
}

// ---- AC-5: eps-uniform minorization ----

Outcome ac5() {
  Outcome o;
  const ModelSpec m = langevin(1);
  SweepConfig cfg;
  cfg.R = 4.0;
  cfg.t0 = 2.0;
  cfg.eps_list = {0.4, 0.2, 0.1, 0.05};
  cfg.grid = GridSpec::cube(2, -4.5, 4.5, 36);
  cfg.n_traj = 1000000;
  cfg.seed = 5;
  cfg.dt_phys = 0.05;
  cfg.ratio_bound = 3.0;

  // Target first: the exact oracle sweep.
  const auto starts = start_lattice(m, cfg.R, cfg.start_fraction);
  std::vector<double> lam;
  for (double eps : cfg.eps_list) lam.push_back(oracle_minorization(m, starts, eps, cfg.t0, cfg.R, cfg.grid).value);
  const double oratio = *std::max_element(lam.begin(), lam.end()) / *std::min_element(lam.begin(), lam.end());
  std::string ol;
  for (std::size_t i = 0; i < lam.size(); ++i) ol += (i ? ", " : "") + fmt_g(lam[i]);
  o.require(oratio <= 2.0, "oracle lambda(eps) = [" + ol + "], max/min " + fmt_g(oratio) + " (<= 2)");

  const MinorizationReport r = minorization_sweep(m, cfg);
  std::string ml;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    ml += (i ? ", " : "") + fmt_g(r.rows[i].lambda_hat) + " [" + fmt_g(r.rows[i].lambda_ci_low) + "]";
  o.note("MC lambda_hat [ci_low] = " + ml);
  o.require(r.min_ci_low > 0, "min lambda_ci_low " + fmt_g(r.min_ci_low) + " > 0");
  o.require(r.lambda_ratio <= 3.0, "MC lambda max/min " + fmt_g(r.lambda_ratio) + " (<= 3)");
  return o;
}

// ---- AC-6: mixing timescale ----

Outcome ac6() {
  Outcome o;
  std::vector<double> t;
  for (int k = 1; k <= 1000; ++k) t.push_back(0.01 * k);
  const MixingReport r = mixing_time(langevin(1), {0.2, 0.1}, t, std::vector<double>{2.0, 0.0});
  for (const auto& row : r.rows)
    o.note("eps " + fmt_g(row.eps) + ": rescaled t_mix " + fmt_g(row.t_mix) + ", physical " +
           fmt_g(row.t_mix_physical));
  o.require(r.spread <= 1.3, "spread of rescaled t_mix " + fmt_g(r.spread) + " (<= 1.3)");
  return o;
}

// ---- AC-7: time-averaged density ----

Outcome ac7() {
  Outcome o;
  {
    const ModelSpec m = langevin(1);
    const double alpha = default_alpha(m);
    for (double eps : {0.4, 0.2, 0.1}) {
      DensityRun run;
      run.eps = eps;
      run.t0 = 1.0;
      run.R = 1.0;
      run.grid = GridSpec::cube(2, -3.0, 3.0, 40);
      run.n_traj = 1000000;
      run.seed = 7;
      run.dt_phys = 0.02;
      const DensityGrid g = estimate_time_averaged(m, {0.0, 0.0}, alpha, run);
      const auto oracle = time_averaged_cell_averages(m, eps, {0.0, 0.0}, run.t0, alpha, run.grid);
      const OracleComparison c = compare_to_oracle(g, oracle);
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < g.hr_mask.size(); ++k)
        if (g.hr_mask[k]) lo = std::min(lo, g.ci_lo[k]);
      o.require(c.max_rel_error <= 0.15 && lo > 0, "linear eps " + fmt_g(eps) + ": max relative error " +
                                                       fmt_g(c.max_rel_error) + " (<= 0.15), min masked CI low " +
                                                       fmt_g(lo) + " (> 0)");
    }
  }
  {
    const ModelSpec m = lorenz(4);
    const double alpha = default_alpha(m);
    for (double eps : {0.4, 0.1}) {
      DensityRun run;
      run.eps = eps;
      run.t0 = 1.0;
      run.R = 1.0;
      run.grid = GridSpec::cube(4, -3.0, 3.0, 12);
      run.n_traj = 1000000;
      run.seed = 8;
      run.dt_phys = 0.01;
      const DensityGrid g = estimate_time_averaged(m, {0.0, 0.0, 0.0, 0.0}, alpha, run);
      double lo = std::numeric_limits<double>::infinity();
      std::size_t masked = 0;
      for (std::size_t k = 0; k < g.hr_mask.size(); ++k)
        if (g.hr_mask[k]) lo = std::min(lo, g.ci_lo[k]), ++masked;
      o.require(lo > 0, "Lorenz96 d=4 eps " + fmt_g(eps) + ": min CI low over " + std::to_string(masked) +
                            " masked cells " + fmt_g(lo) + " (> 0), out-of-box " + fmt_g(g.out_of_box_fraction()));
    }
  }
  return o;
}

// ---- AC-8..AC-11: exact combinatorics ----

Outcome ac8() {
  Outcome o;
  const SteinhausSweep s = steinhaus_sweep(100, Rational(3), Rational(1, 2), 8);
  o.require(s.n == 122, "n = ceil(20 L / eta) + 2 = " + std::to_string(s.n));
  o.require(s.n_sets == 100 && s.failures == 0,
            std::to_string(s.n_sets) + " random sets, " + std::to_string(s.failures) +
                " without a unit interval in nA (max sumset intervals " + std::to_string(s.max_sumset_intervals) + ")");
  return o;
}

Outcome ac9() {
  Outcome o;
  const LevSweep s = lev_exhaustive(8);
  o.require(s.failures == 0, std::to_string(s.n_admissible) + " admissible B of " + std::to_string(s.n_subsets) +
                                 " subsets of {0..8}, " + std::to_string(s.failures) + " below the block bound");
  return o;
}

Outcome ac10() {
  Outcome o;
  const NoConcentrationSweep s = no_concentration_sweep(200, 10);
  o.require(s.n_instances == 200 && s.violations == 0,
            std::to_string(s.n_instances) + " instances, " + std::to_string(s.violations) + " violations");
  return o;
}

Outcome ac11() {
  Outcome o;
  SmallSetConfig cfg;
  cfg.prefer_direct = false;
  const SmallSetResult r = small_set_pipeline(lazy_walk_fixture(50, Rational(1, 1000), 10), cfg);
  o.require(r.verified && sgn(r.lambda) > 0 && r.bit_exact,
            "50-state lazy walk (" + r.route + " route): t0 = " + std::to_string(r.t0) + ", lambda = " +
                fmt_g(to_double(r.lambda)) + ", verified " + (r.verified ? "yes" : "no") + ", bit-exact " +
                (r.bit_exact ? "yes" : "no"));
  bool petite_fail = false;
  std::string detail = "pipeline did not fail";
  try {
    small_set_pipeline(disconnected_fixture(), SmallSetConfig{});
  } catch (const PipelineError& e) {
    petite_fail = e.kind() == "petite" && !e.partial().petite.holds;
    detail = "kind " + e.kind() + ", witness (" + std::to_string(e.partial().petite.witness_x) + ", " +
             std::to_string(e.partial().petite.witness_y) + ")";
  }
  o.require(petite_fail, "disconnected fixture fails the petite precondition: " + detail);
  return o;
}

struct Criterion {
  int id;
  std::function<Outcome()> run;
  double budget_s;  // 0 when the criterion states no hard time limit
};

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  const std::vector<Criterion> all = {
      {1, ac1, 1.0},   {2, ac2, 30.0}, {3, ac3, 60.0}, {4, ac4, 0.0},   {5, ac5, 0.0},  {6, ac6, 60.0},
      {7, ac7, 0.0},   {8, ac8, 60.0}, {9, ac9, 10.0}, {10, ac10, 0.0}, {11, ac11, 60.0},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--ac" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--ac N]...\n", argv[0]);
      return 1;
    }
  }
  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      out.pass = false;
      out.note("over the time budget of " + fmt_g(c.budget_s) + " s");
    }
    std::printf("AC-%d %s (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", secs);
    for (const auto& n : out.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    ok = ok && out.pass;
  }
  return ok ? 0 : 1;
}
