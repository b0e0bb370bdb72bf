#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minorlab/exec.hpp"
#include "minorlab/hormander.hpp"
#include "minorlab/models.hpp"

namespace minorlab {

struct ExactCheck {
  std::string name;
  bool holds = false;
  std::string offending;  // printed expression when it fails
};

struct DivZReport {
  Rational inf, sup_abs, margin;  // margin = inf - sup_abs/2
  bool rigorous = false;          // true when div Z is constant
  bool passes = false;
};

struct PointWitness {
  std::size_t index = 0;
  std::vector<Rational> x;
  Rational lhs, rhs;  // inequality lhs <= rhs
  Rational margin;    // rhs - lhs
};

struct V4Report {
  std::size_t n_points = 0;
  // First inequality: eta sum (Z_j H)^2 <= ZH + sum Z_j^2 H.
  PointWitness worst1;
  // Second inequality: ZH + sum Z_j^2 H <= ZH + dstar/2.
  PointWitness worst2;
  std::optional<PointWitness> first_violation;
  int first_violation_inequality = 0;
  IntegrabilityReport integrability;
  bool passes = false;
};

struct LyapunovReport {
  // P = (L_eps(H+1) - dstar eps)/eps, which must be <= 0.
  std::string expression;
  bool symbolic = false;
  Rational max_margin;  // max of P over points when not symbolic
  std::optional<PointWitness> witness;
  bool passes = false;
};

struct AssumptionReport {
  std::string model;
  std::vector<ExactCheck> v2_div_zero;
  DivZReport v2_divZ;
  ExactCheck v3_conserves;
  bool h_nonnegative = false;
  V4Report v4;
  std::optional<HormanderCertificate> v5;
  LyapunovReport lyapunov;
  std::string aborted;  // empty unless an exact check failed
  bool passes = false;
};

struct AuditConfig {
  Rational box_halfwidth{10};
  bool run_certificate = true;
  HormanderConfig cert;
};

// Axis probes +b e_i, -b e_i, the origin, then seeded rationals (denominator
// 1000) uniform in [-b, b]^d.
std::vector<std::vector<Rational>> audit_points(std::size_t d, const Rational& b, std::size_t n_random,
                                                std::uint64_t seed);

AssumptionReport check_assumptions(const ModelSpec& m, const AuditConfig& cfg, std::size_t n_points,
                                   std::uint64_t seed, Exec exec = Exec::Parallel);

V4Report v4_scan(const ModelSpec& m, const std::vector<std::vector<Rational>>& points, Exec exec);

struct LF2Constants {
  Rational d1, d2, R;
};

struct DriftReport {
  Rational eps;
  PolyExpr LV;  // L_eps V with eps substituted
  std::vector<Rational> values;
  std::optional<LF2Constants> lf2;
  // max over points of L V + eps d1 V - eps d2 1{H < R}; <= 0 means LF2 holds there.
  std::optional<Rational> lf2_max_margin;
  std::size_t lf2_witness = 0;
  // max over points of L(H+1) - dstar eps.
  Rational dstar_max_margin;
  std::size_t dstar_witness = 0;
  // Largest d1 consistent with the points outside H_R, and the matching d2.
  std::optional<Rational> fitted_d1, fitted_d2;
};

DriftReport lyapunov_drift(const ModelSpec& m, const PolyExpr& V, const Rational& eps,
                           const std::vector<std::vector<Rational>>& points,
                           std::optional<LF2Constants> lf2 = std::nullopt, const Rational& R_fit = Rational(1));

}  // namespace minorlab
