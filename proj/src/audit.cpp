#include "minorlab/audit.hpp"

#include <cstdlib>
#include <omp.h>

#include <algorithm>

#include "minorlab/rng.hpp"

namespace minorlab {

using symbolic::apply_to_scalar;
using symbolic::divergence;
using symbolic::to_string;

int configure_threads_from_env() {
  if (const char* env = std::getenv("MINORLAB_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_max_threads())));
  }
  return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

std::vector<std::vector<Rational>> audit_points(std::size_t d, const Rational& b, std::size_t n_random,
                                                std::uint64_t seed) {
  std::vector<std::vector<Rational>> pts;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Rational> x(d, Rational(0));
    x[i] = b;
    pts.push_back(x);
    x[i] = -b;
    pts.push_back(x);
  }
  pts.emplace_back(d, Rational(0));
  // Grid of 1/1000 inside [-b, b].
  Integer span_z = ceil_rational(b * 1000) - (b * 1000 == ceil_rational(b * 1000) ? 0 : 1);
  const long span = span_z.get_si();
  CounterStream rng(seed, StreamPurpose::Samples, 1);
  for (std::size_t k = 0; k < n_random; ++k) {
    std::vector<Rational> x(d);
    for (std::size_t j = 0; j < d; ++j)
      x[j] = ratio(static_cast<long>(rng.next_below(static_cast<std::uint64_t>(2 * span + 1))) - span, 1000);
    pts.push_back(std::move(x));
  }
  return pts;
}

namespace {

struct V4Polys {
  PolyExpr A, B, C;  // A <= B <= C
};

V4Polys v4_polys(const ModelSpec& m) {
  const std::size_t d = m.d;
  PolyExpr ZH = apply_to_scalar(m.Z, m.H);
  PolyExpr sq(d), second(d);
  for (const auto& z : m.Zs) {
    if (z.is_zero()) continue;
    PolyExpr wh = apply_to_scalar(z.field, m.H);
    sq += z.scale_sq * (wh * wh);
    second += z.scale_sq * apply_to_scalar(z.field, wh);
  }
  return {m.eta * sq, ZH + second, ZH + PolyExpr::constant(d, m.dstar / 2)};
}

bool nonpositive_form(const PolyExpr& p) {
  for (const auto& [e, c] : p.terms()) {
    if (sgn(c) > 0) return false;
    for (auto k : e)
      if (k % 2 != 0) return false;
  }
  return true;
}

PointWitness witness(std::size_t i, const std::vector<Rational>& x, const Rational& lhs, const Rational& rhs) {
  return PointWitness{i, x, lhs, rhs, rhs - lhs};
}

}  // namespace

V4Report v4_scan(const ModelSpec& m, const std::vector<std::vector<Rational>>& points, Exec exec) {
  if (points.empty()) throw std::invalid_argument("v4_scan: no points");
  const V4Polys P = v4_polys(m);
  const std::size_t n = points.size();
  std::vector<Rational> a(n), b(n), c(n);
  auto eval = [&](std::size_t i) {
    std::span<const Rational> x(points[i]);
    a[i] = P.A.evaluate(x, 0);
    b[i] = P.B.evaluate(x, 0);
    c[i] = P.C.evaluate(x, 0);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) eval(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) eval(i);
  }
  // Deterministic reduction: minimum margin, lowest index on ties.
  V4Report rep;
  rep.n_points = n;
  rep.worst1 = witness(0, points[0], a[0], b[0]);
  rep.worst2 = witness(0, points[0], b[0], c[0]);
  for (std::size_t i = 0; i < n; ++i) {
    if (b[i] - a[i] < rep.worst1.margin) rep.worst1 = witness(i, points[i], a[i], b[i]);
    if (c[i] - b[i] < rep.worst2.margin) rep.worst2 = witness(i, points[i], b[i], c[i]);
    if (!rep.first_violation) {
      if (a[i] > b[i]) {
        rep.first_violation = witness(i, points[i], a[i], b[i]);
        rep.first_violation_inequality = 1;
      } else if (b[i] > c[i]) {
        rep.first_violation = witness(i, points[i], b[i], c[i]);
        rep.first_violation_inequality = 2;
      }
    }
  }
  rep.integrability = integrability_certificate(m.H, m.H_pieces);
  rep.passes = !rep.first_violation && rep.integrability.certified;
  return rep;
}

AssumptionReport check_assumptions(const ModelSpec& m, const AuditConfig& cfg, std::size_t n_points,
                                   std::uint64_t seed, Exec exec) {
  if (n_points < 1) throw std::invalid_argument("check_assumptions: n_points must be >= 1");
  AssumptionReport rep;
  rep.model = m.name;

  auto exact = [&](const std::string& name, const PolyExpr& expr) {
    ExactCheck c{name, expr.is_zero(), expr.is_zero() ? "" : to_string(expr)};
    return c;
  };
  rep.v2_div_zero.push_back(exact("div(Z0)", divergence(m.Z0)));
  for (std::size_t j = 0; j < m.Zs.size(); ++j)
    rep.v2_div_zero.push_back(exact("div(Z" + std::to_string(j + 1) + ")", divergence(m.Zs[j].field)));
  for (const auto& c : rep.v2_div_zero)
    if (!c.holds) {
      rep.aborted = "V2: " + c.name + " = " + c.offending;
      return rep;
    }
  rep.v3_conserves = exact("Z0 H", apply_to_scalar(m.Z0, m.H));
  if (!rep.v3_conserves.holds) {
    rep.aborted = "V3: Z0 H = " + rep.v3_conserves.offending;
    return rep;
  }

  const auto points = audit_points(m.d, cfg.box_halfwidth, n_points, seed);

  const PolyExpr divZ = divergence(m.Z);
  if (auto c = divZ.constant_value()) {
    rep.v2_divZ.inf = *c;
    rep.v2_divZ.sup_abs = rational_abs(*c);
    rep.v2_divZ.rigorous = true;
  } else {
    bool first = true;
    for (const auto& x : points) {
      Rational v = divZ.evaluate(std::span<const Rational>(x), 0);
      if (first || v < rep.v2_divZ.inf) rep.v2_divZ.inf = v;
      if (first || rational_abs(v) > rep.v2_divZ.sup_abs) rep.v2_divZ.sup_abs = rational_abs(v);
      first = false;
    }
  }
  rep.v2_divZ.margin = rep.v2_divZ.inf - rep.v2_divZ.sup_abs / 2;
  rep.v2_divZ.passes = sgn(rep.v2_divZ.margin) > 0;

  rep.h_nonnegative = true;
  for (const auto& x : points)
    if (sgn(m.H.evaluate(std::span<const Rational>(x), 0)) < 0) rep.h_nonnegative = false;

  rep.v4 = v4_scan(m, points, exec);

  if (cfg.run_certificate) rep.v5 = hormander_certificate(m, cfg.cert);

  // Lyapunov bound for V = H + 1, using Z0 H = 0.
  const V4Polys P = v4_polys(m);
  PolyExpr lyap = P.B - apply_to_scalar(m.Z, m.H) * Rational(2) - PolyExpr::constant(m.d, m.dstar);
  rep.lyapunov.expression = to_string(lyap);
  if (nonpositive_form(lyap)) {
    rep.lyapunov.symbolic = true;
    rep.lyapunov.passes = true;
  } else {
    bool first = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
      Rational v = lyap.evaluate(std::span<const Rational>(points[i]), 0);
      if (first || v > rep.lyapunov.max_margin) {
        rep.lyapunov.max_margin = v;
        rep.lyapunov.witness = witness(i, points[i], v, 0);
      }
      first = false;
    }
    rep.lyapunov.passes = sgn(rep.lyapunov.max_margin) <= 0;
  }

  rep.passes = rep.v2_divZ.passes && rep.h_nonnegative && rep.v4.passes && (!rep.v5 || rep.v5->passes) &&
               rep.lyapunov.passes;
  return rep;
}

DriftReport lyapunov_drift(const ModelSpec& m, const PolyExpr& V, const Rational& eps,
                           const std::vector<std::vector<Rational>>& points, std::optional<LF2Constants> lf2,
                           const Rational& R_fit) {
  DriftReport rep;
  rep.eps = eps;
  rep.lf2 = lf2;
  rep.LV = generator_apply(m, V).substitute_eps(eps);
  const PolyExpr LH = generator_apply(m, m.H).substitute_eps(eps);
  const Rational dstar_eps = m.dstar * eps;
  bool first = true;
  std::optional<Rational> d1_fit;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::span<const Rational> x(points[i]);
    Rational v = V.evaluate(x, eps);
    if (v < 1) throw std::invalid_argument("lyapunov_drift: V < 1 at point " + std::to_string(i));
    Rational lv = rep.LV.evaluate(x, eps);
    rep.values.push_back(lv);
    Rational h = m.H.evaluate(x, 0);
    Rational dm = LH.evaluate(x, eps) - dstar_eps;
    if (first || dm > rep.dstar_max_margin) {
      rep.dstar_max_margin = dm;
      rep.dstar_witness = i;
    }
    if (lf2) {
      Rational mg = lv + eps * lf2->d1 * v - (h < lf2->R ? eps * lf2->d2 : Rational(0));
      if (!rep.lf2_max_margin || mg > *rep.lf2_max_margin) {
        rep.lf2_max_margin = mg;
        rep.lf2_witness = i;
      }
    }
    if (!(h < R_fit)) {
      Rational cand = -lv / (eps * v);
      if (!d1_fit || cand < *d1_fit) d1_fit = cand;
    }
    first = false;
  }
  if (d1_fit && sgn(*d1_fit) > 0) {
    rep.fitted_d1 = d1_fit;
    Rational d2 = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::span<const Rational> x(points[i]);
      if (!(m.H.evaluate(x, 0) < R_fit)) continue;
      Rational cand = (rep.values[i] + eps * *d1_fit * V.evaluate(x, eps)) / eps;
      if (cand > d2) d2 = cand;
    }
    rep.fitted_d2 = d2;
  }
  return rep;
}

}  // namespace minorlab
