#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "minorlab/rational.hpp"

namespace minorlab::symbolic {

// Exponents of (x1..xd, eps); the last slot is the eps power.
using Exponents = std::vector<std::uint32_t>;

class PolyExpr {
 public:
  using TermMap = std::map<Exponents, Rational>;

  explicit PolyExpr(std::size_t dim = 1);

  static PolyExpr constant(std::size_t dim, const Rational& c);
  // x_{index+1}, zero-based index.
  static PolyExpr variable(std::size_t dim, std::size_t index);
  static PolyExpr eps(std::size_t dim);

  std::size_t dim() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // Constant in both x and eps.
  std::optional<Rational> constant_value() const;
  // Free of x (may still depend on eps).
  bool is_x_constant() const;
  std::uint32_t degree() const;      // total degree in x
  std::uint32_t eps_degree() const;

  void add_term(const Exponents& e, const Rational& c);

  PolyExpr derivative(std::size_t var) const;
  PolyExpr substitute_eps(const Rational& eps) const;
  PolyExpr pow(std::uint32_t k) const;

  Rational evaluate(std::span<const Rational> x, const Rational& eps) const;
  double evaluate(std::span<const double> x, double eps) const;

  PolyExpr& operator+=(const PolyExpr& o);
  PolyExpr& operator-=(const PolyExpr& o);
  PolyExpr& operator*=(const Rational& c);
  friend PolyExpr operator+(PolyExpr a, const PolyExpr& b) { return a += b; }
  friend PolyExpr operator-(PolyExpr a, const PolyExpr& b) { return a -= b; }
  friend PolyExpr operator*(const PolyExpr& a, const PolyExpr& b);
  friend PolyExpr operator*(PolyExpr a, const Rational& c) { return a *= c; }
  friend PolyExpr operator*(const Rational& c, PolyExpr a) { return a *= c; }
  PolyExpr operator-() const;
  bool operator==(const PolyExpr& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

 private:
  std::size_t dim_;
  TermMap terms_;
};

class VectorField {
 public:
  explicit VectorField(std::size_t dim = 1);
  explicit VectorField(std::vector<PolyExpr> components);

  // The coordinate field d/dx_{j+1}.
  static VectorField basis(std::size_t dim, std::size_t j);

  std::size_t dim() const { return components_.size(); }
  const PolyExpr& operator[](std::size_t j) const { return components_[j]; }
  PolyExpr& operator[](std::size_t j) { return components_[j]; }
  const std::vector<PolyExpr>& components() const { return components_; }
  bool is_zero() const;
  bool is_x_constant() const;

  VectorField substitute_eps(const Rational& eps) const;
  std::vector<Rational> evaluate(std::span<const Rational> x, const Rational& eps) const;
  std::vector<double> evaluate(std::span<const double> x, double eps) const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(const Rational& c, const VectorField& X);
  friend VectorField operator*(const PolyExpr& f, const VectorField& X);
  VectorField operator-() const;
  bool operator==(const VectorField& o) const { return components_ == o.components_; }

 private:
  std::vector<PolyExpr> components_;
};

std::string to_string(const PolyExpr& p);
std::string to_string(const VectorField& X);

// [X,Y]^j = sum_k X^k d_k Y^j - Y^k d_k X^j
VectorField lie_bracket(const VectorField& X, const VectorField& Y);
PolyExpr divergence(const VectorField& X);
VectorField ad_power(const VectorField& X, const VectorField& Y, unsigned j);
// Directional derivative X f.
PolyExpr apply_to_scalar(const VectorField& X, const PolyExpr& f);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- DSL ----

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, DimensionMismatch, NegativeExponent };
  ParseError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

// v_i aliases x_{dim/2 + i}; requires even dim.
VectorField parse_field(std::string_view text, std::size_t dim);
PolyExpr parse_scalar(std::string_view text, std::size_t dim);

// ---- double-precision evaluation for hot loops ----

class CompiledPoly {
 public:
  CompiledPoly() = default;
  // eps is folded into the coefficients.
  CompiledPoly(const PolyExpr& p, double eps);
  double operator()(const double* x) const;
  bool empty() const { return coef_.empty(); }

 private:
  std::vector<double> coef_;
  std::vector<std::uint32_t> offsets_;  // into factors_, size = terms+1
  std::vector<std::pair<std::uint32_t, std::uint32_t>> factors_;  // (var, power)
};

class CompiledField {
 public:
  CompiledField() = default;
  CompiledField(const VectorField& X, double eps);
  std::size_t dim() const { return comps_.size(); }
  void operator()(const double* x, double* out) const;

 private:
  std::vector<CompiledPoly> comps_;
};

}  // namespace minorlab::symbolic
