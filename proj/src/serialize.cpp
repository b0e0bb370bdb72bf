#include "minorlab/serialize.hpp"

#include <cmath>

namespace minorlab {

namespace {

Json number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

Json word_json(const std::vector<int>& w) { return Json(w); }

Json point_json(const std::vector<Rational>& x) { return to_json(x); }

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(const Rational& q) { return to_string(q); }

Json to_json(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(to_string(q));
  return a;
}

Json to_json(const HormanderCertificate& c) {
  Json j;
  Json words = Json::array(), fields = Json::array();
  for (const auto& b : c.brackets) {
    words.push_back(word_json(b.word));
    fields.push_back(symbolic::to_string(b.field));
  }
  j["brackets"] = words;
  j["bracket_fields"] = fields;
  j["eps_grid"] = to_json(c.eps_grid);
  Json xs = Json::array();
  for (const auto& x : c.x_samples) xs.push_back(point_json(x));
  j["x_samples"] = xs;
  Json fm = Json::array();
  for (const auto& row : c.min_singular) {
    Json r = Json::array();
    for (double v : row) r.push_back(number(v));
    fm.push_back(r);
  }
  j["floor_matrix"] = fm;
  Json pe = Json::array();
  for (double v : c.per_eps_floor) pe.push_back(number(v));
  j["per_eps_floor"] = pe;
  j["uniform_floor"] = number(c.uniform_floor);
  j["floor_ratio"] = number(c.floor_ratio);
  j["max_depth"] = c.max_depth;
  j["threshold"] = to_json(c.threshold);
  j["ratio_bound"] = to_json(c.ratio_bound);
  Json def = Json::array();
  for (const auto& d : c.deficiencies)
    def.push_back({{"eps", to_string(c.eps_grid[d.eps_index])}, {"x", point_json(c.x_samples[d.x_index])}, {"rank", d.rank}});
  j["deficiencies"] = def;
  j["verdict"] = c.passes ? "pass" : "fail";
  return j;
}

Json to_json(const PointWitness& w) {
  return {{"index", w.index}, {"x", point_json(w.x)}, {"lhs", to_json(w.lhs)}, {"rhs", to_json(w.rhs)},
          {"margin", to_json(w.margin)}};
}

Json to_json(const V4Report& r) {
  Json j;
  j["n_points"] = r.n_points;
  j["worst_first_inequality"] = to_json(r.worst1);
  j["worst_second_inequality"] = to_json(r.worst2);
  if (r.first_violation) {
    j["first_violation"] = to_json(*r.first_violation);
    j["first_violation"]["inequality"] = r.first_violation_inequality;
  } else {
    j["first_violation"] = nullptr;
  }
  j["integrability"] = {{"certified", r.integrability.certified},
                        {"method", r.integrability.method},
                        {"detail", r.integrability.detail}};
  j["passes"] = r.passes;
  return j;
}

Json to_json(const AssumptionReport& r) {
  Json j;
  j["model"] = r.model;
  Json v2 = Json::array();
  for (const auto& c : r.v2_div_zero) v2.push_back({{"name", c.name}, {"holds", c.holds}, {"offending", c.offending}});
  j["v2_div_zero"] = v2;
  if (!r.aborted.empty()) {
    j["aborted"] = r.aborted;
    j["passes"] = false;
    return j;
  }
  j["v2_divZ"] = {{"inf", to_json(r.v2_divZ.inf)},
                  {"sup_abs", to_json(r.v2_divZ.sup_abs)},
                  {"margin", to_json(r.v2_divZ.margin)},
                  {"rigorous", r.v2_divZ.rigorous},
                  {"passes", r.v2_divZ.passes}};
  j["v3_conserves"] = {{"holds", r.v3_conserves.holds}, {"offending", r.v3_conserves.offending}};
  j["h_nonnegative"] = r.h_nonnegative;
  j["v4"] = to_json(r.v4);
  j["v5"] = r.v5 ? to_json(*r.v5) : Json(nullptr);
  Json ly;
  ly["expression"] = r.lyapunov.expression;
  ly["symbolic"] = r.lyapunov.symbolic;
  if (!r.lyapunov.symbolic) {
    ly["max_margin"] = to_json(r.lyapunov.max_margin);
    ly["witness"] = opt(r.lyapunov.witness);
  }
  ly["passes"] = r.lyapunov.passes;
  j["lyapunov"] = ly;
  j["passes"] = r.passes;
  return j;
}

Json to_json(const DriftReport& r) {
  Json j;
  j["eps"] = to_json(r.eps);
  j["LV"] = symbolic::to_string(r.LV);
  j["values"] = to_json(r.values);
  j["dstar_max_margin"] = to_json(r.dstar_max_margin);
  j["dstar_witness"] = r.dstar_witness;
  if (r.lf2) {
    j["lf2"] = {{"d1", to_json(r.lf2->d1)}, {"d2", to_json(r.lf2->d2)}, {"R", to_json(r.lf2->R)}};
    j["lf2_max_margin"] = opt(r.lf2_max_margin);
    j["lf2_witness"] = r.lf2_witness;
  }
  j["fitted_d1"] = opt(r.fitted_d1);
  j["fitted_d2"] = opt(r.fitted_d2);
  return j;
}

Json to_json(const MinorizationReport& r) {
  Json j;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json x = {{"eps", row.eps},
              {"t0", row.t0},
              {"R", row.R},
              {"lambda_hat", number(row.lambda_hat)},
              {"lambda_ci_low", number(row.lambda_ci_low)},
              {"argmin_start", row.argmin_start},
              {"argmin_cell", row.argmin_cell},
              {"n_traj", row.n_traj},
              {"seed", row.seed}};
    if (row.oracle_lambda) x["oracle_lambda"] = number(*row.oracle_lambda);
    rows.push_back(x);
  }
  j["rows"] = rows;
  j["starts"] = r.starts;
  j["ratio_bound"] = r.ratio_bound;
  j["min_ci_low"] = number(r.min_ci_low);
  j["lambda_ratio"] = number(r.lambda_ratio);
  if (r.oracle_ratio) j["oracle_ratio"] = number(*r.oracle_ratio);
  j["passes"] = r.passes;
  return j;
}

Json to_json(const OracleComparison& c) {
  return {{"n_masked", c.n_masked},
          {"max_rel_error", number(c.max_rel_error)},
          {"worst_cell", c.worst_cell},
          {"n_in_ci", c.n_in_ci},
          {"fraction_in_ci", number(c.fraction_in_ci)}};
}

Json density_summary(const DensityGrid& g) {
  std::size_t masked = 0;
  double min_ci = std::numeric_limits<double>::infinity(), min_est = min_ci;
  for (std::size_t c = 0; c < g.counts.size(); ++c)
    if (g.hr_mask[c]) {
      ++masked;
      min_ci = std::min(min_ci, g.ci_lo[c]);
      min_est = std::min(min_est, g.estimate(c));
    }
  return {{"lo", g.grid.lo},
          {"hi", g.grid.hi},
          {"cells", g.grid.cells},
          {"n_effective", g.n_effective},
          {"n_out_of_box", g.n_out_of_box},
          {"total_mass", number(g.total_mass())},
          {"n_masked", masked},
          {"min_masked_estimate", number(min_est)},
          {"min_masked_ci_low", number(min_ci)}};
}

Json to_json(const MixingReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"t_mix", row.t_mix},
                    {"t_mix_physical", row.t_mix_physical},
                    {"eps_times_t_phys", row.eps_times_t_phys},
                    {"tv_at_mix", row.tv_at_mix},
                    {"tv_before", row.tv_before}});
  return {{"rows", rows}, {"spread", number(r.spread)}};
}

Json to_json(const LowerBoundSet& r) {
  return {{"threshold", to_json(r.threshold)},
          {"measure_bound", to_json(r.measure_bound)},
          {"measure", to_json(r.measure)},
          {"set", r.set},
          {"bound_holds", r.bound_holds}};
}

Json to_json(const SteinhausResult& r) {
  Json j = {{"n", r.n}, {"sumset_intervals", r.sumset_intervals}};
  if (r.unit)
    j["unit_interval"] = {to_string(r.unit->lo), to_string(r.unit->hi)};
  else
    j["unit_interval"] = nullptr;
  return j;
}

Json to_json(const LevResult& r, bool include_sumset) {
  Json j = {{"ell", r.ell},
            {"M", r.M},
            {"min_n", r.min_n},
            {"longest_run", r.longest_run},
            {"run_start", r.run_start},
            {"hypotheses_ok", r.hypotheses_ok},
            {"block_bound_holds", r.block_bound_holds}};
  if (include_sumset) j["sumset"] = r.sumset.values();
  return j;
}

Json to_json(const PetiteReport& r) {
  Json j = {{"holds", r.holds},
            {"min_sum", to_json(r.min_sum)},
            {"witness", {r.witness_x, r.witness_y}},
            {"max_entry", to_json(r.max_entry)},
            {"max_at", {{"t", r.max_t}, {"x", r.max_x}, {"y", r.max_y}}}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

Json to_json(const SmallSetResult& r) {
  Json j;
  j["route"] = r.route;
  j["H_R"] = r.H_R;
  j["petite"] = to_json(r.petite);
  j["c_R"] = to_json(r.c_R);
  j["C_R"] = to_json(r.C_R);
  if (r.route == "constructive") {
    j["search"] = {{"t", r.t},
                   {"tau", r.tau},
                   {"u", r.u},
                   {"v", r.v},
                   {"w", r.w},
                   {"delta4", to_json(r.delta4)},
                   {"delta_achieved", to_json(r.delta_achieved)}};
    j["E1"] = r.E1;
    j["E2"] = r.E2;
    j["t1"] = r.t1;
    j["delta2"] = to_json(r.delta2);
    j["t2"] = r.t2;
    j["delta3"] = to_json(r.delta3);
    j["mass_bound"] = to_json(r.mass_bound);
    j["good_times"] = r.good_times;
    j["delta_good"] = to_json(r.delta_good);
    j["delta1"] = to_json(r.delta1);
    j["delta_a1"] = to_json(r.delta_a1);
    j["sumset"] = {{"n", r.lev_n},
                   {"M", r.lev_M},
                   {"ell", r.lev_ell},
                   {"hypotheses_ok", r.lev_hypotheses_ok},
                   {"block_start", r.block_start},
                   {"block_length", r.block_length}};
  }
  j["E"] = r.E;
  j["t_star"] = r.t_star;
  j["delta"] = to_json(r.delta);
  j["t0"] = r.t0;
  j["lambda"] = to_json(r.lambda);
  j["lambda_double"] = number(r.lambda.get_d());
  j["verification"] = {{"min_entry", to_json(r.verified_min)},
                       {"argmin", {r.verified_x, r.verified_y}},
                       {"small_set_min", to_json(r.small_set_min)},
                       {"bit_exact", r.bit_exact},
                       {"verified", r.verified}};
  return j;
}

Json to_json(const TransversalityReport& r) {
  Json off = Json::array();
  for (const auto& f : r.offenders) off.push_back({{"vertices", f.vertices}, {"normal", f.normal}});
  return {{"all_transverse", r.all_transverse}, {"n_facets", r.n_facets}, {"offenders", off}};
}

}  // namespace minorlab
