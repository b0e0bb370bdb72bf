#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minorlab/symbolic.hpp"

namespace minorlab {

using symbolic::PolyExpr;
using symbolic::VectorField;

// sqrt(scale_sq) * field. Perfect squares are folded into the field by the
// builders, so scale_sq != 1 only for irrational scales such as sqrt(2).
struct NoiseField {
  VectorField field;
  Rational scale_sq{1};

  bool is_zero() const { return field.is_zero() || sgn(scale_sq) == 0; }
};

// coef * (linear . x)^power with coef > 0 and even power; manifestly >= 0.
struct EvenPowerPiece {
  Rational coef;
  std::vector<Rational> linear;
  unsigned power = 2;

  PolyExpr expand(std::size_t dim) const;
};

struct ModelSpec {
  std::string name;
  std::string family;
  std::size_t d = 0;
  std::size_t r = 0;
  VectorField Z, Z0;
  std::vector<NoiseField> Zs;
  PolyExpr H;
  Rational eta, dstar;
  std::map<std::string, Rational> params;
  // Nonnegative summands of H recorded by the builder for the integrability check.
  std::vector<EvenPowerPiece> H_pieces;

  // -eps Z + Z0 with eps formal.
  VectorField drift() const;
  // The same drift with eps substituted.
  VectorField drift(const Rational& eps) const;
};

// Raw "key = value" strings, validated per family.
using ModelParams = std::map<std::string, std::string>;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string>& model_families();
// Accepted keys for a family (every family also takes name, eta, dstar).
std::vector<std::string> model_param_keys(std::string_view family);

ModelSpec build_model(std::string_view family, const ModelParams& params);

// Generator L_eps f = -eps Z f + Z0 f + eps sum_j s_j W_j(W_j f), eps formal.
PolyExpr generator_apply(const ModelSpec& m, const PolyExpr& f);

// ---- integrability of exp(-eta H) ----

struct IntegrabilityReport {
  bool certified = false;
  std::string method;  // "quadratic-leading-form" | "newton-simplex" | "none"
  std::string detail;
};

IntegrabilityReport integrability_certificate(const PolyExpr& H, const std::vector<EvenPowerPiece>& pieces);

// ---- sublevel geometry helpers ----

// Smallest half-width b (by doubling from 1/8) whose box boundary probes all
// satisfy H >= level.
double sublevel_halfwidth(const PolyExpr& H, double level);
// True when every probe on the box boundary has H >= level.
bool box_covers_sublevel(const PolyExpr& H, const std::vector<double>& lo, const std::vector<double>& hi,
                         double level);

}  // namespace minorlab
