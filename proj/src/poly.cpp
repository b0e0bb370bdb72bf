#include <cmath>
#include <sstream>

#include "minorlab/symbolic.hpp"

namespace minorlab::symbolic {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

Rational ipow(const Rational& base, std::uint32_t k) {
  Rational out = 1, b = base;
  while (k) {
    if (k & 1u) out *= b;
    b *= b;
    k >>= 1;
  }
  return out;
}

double ipow(double base, std::uint32_t k) {
  double out = 1.0;
  while (k) {
    if (k & 1u) out *= base;
    base *= base;
    k >>= 1;
  }
  return out;
}

std::string monomial_string(const Exponents& e) {
  std::string out;
  auto emit = [&](const std::string& name, std::uint32_t p) {
    if (p == 0) return;
    if (!out.empty()) out += "*";
    out += name;
    if (p > 1) out += "^" + std::to_string(p);
  };
  for (std::size_t i = 0; i + 1 < e.size(); ++i) emit("x" + std::to_string(i + 1), e[i]);
  emit("eps", e.back());
  return out;
}

// Appends "c*m*suffix" with a sign-aware separator.
void append_term(std::string& out, const Rational& c, const std::string& mono, const std::string& suffix) {
  bool neg = sgn(c) < 0;
  Rational a = neg ? Rational(-c) : c;
  std::string body;
  bool unit = (a == 1);
  if (!unit || (mono.empty() && suffix.empty())) body = minorlab::to_string(a);
  auto join = [&](const std::string& s) {
    if (s.empty()) return;
    if (!body.empty()) body += "*";
    body += s;
  };
  join(mono);
  join(suffix);
  if (out.empty())
    out = neg ? "-" + body : body;
  else
    out += (neg ? " - " : " + ") + body;
}

}  // namespace

// ---------------- PolyExpr ----------------

PolyExpr::PolyExpr(std::size_t dim) : dim_(dim) {}

PolyExpr PolyExpr::constant(std::size_t dim, const Rational& c) {
  PolyExpr p(dim);
  p.add_term(Exponents(dim + 1, 0), c);
  return p;
}

PolyExpr PolyExpr::variable(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("variable index out of range");
  PolyExpr p(dim);
  Exponents e(dim + 1, 0);
  e[index] = 1;
  p.add_term(e, 1);
  return p;
}

PolyExpr PolyExpr::eps(std::size_t dim) {
  PolyExpr p(dim);
  Exponents e(dim + 1, 0);
  e[dim] = 1;
  p.add_term(e, 1);
  return p;
}

std::optional<Rational> PolyExpr::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() != 1) return std::nullopt;
  const auto& [e, c] = *terms_.begin();
  for (auto p : e)
    if (p) return std::nullopt;
  return c;
}

bool PolyExpr::is_x_constant() const {
  for (const auto& [e, c] : terms_)
    for (std::size_t i = 0; i < dim_; ++i)
      if (e[i]) return false;
  return true;
}

std::uint32_t PolyExpr::degree() const {
  std::uint32_t d = 0;
  for (const auto& [e, c] : terms_) {
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < dim_; ++i) s += e[i];
    d = std::max(d, s);
  }
  return d;
}

std::uint32_t PolyExpr::eps_degree() const {
  std::uint32_t d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[dim_]);
  return d;
}

void PolyExpr::add_term(const Exponents& e, const Rational& c) {
  if (e.size() != dim_ + 1) throw DimensionError("exponent vector has wrong length");
  if (sgn(c) == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

PolyExpr PolyExpr::derivative(std::size_t var) const {
  if (var >= dim_) throw DimensionError("derivative variable out of range");
  PolyExpr out(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents f = e;
    f[var] -= 1;
    out.add_term(f, c * e[var]);
  }
  return out;
}

PolyExpr PolyExpr::substitute_eps(const Rational& eps) const {
  PolyExpr out(dim_);
  for (const auto& [e, c] : terms_) {
    Exponents f = e;
    f[dim_] = 0;
    out.add_term(f, c * ipow(eps, e[dim_]));
  }
  return out;
}

PolyExpr PolyExpr::pow(std::uint32_t k) const {
  PolyExpr out = constant(dim_, 1), b = *this;
  while (k) {
    if (k & 1u) out = out * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return out;
}

Rational PolyExpr::evaluate(std::span<const Rational> x, const Rational& eps) const {
  require_same_dim(x.size(), dim_, "evaluate");
  Rational acc = 0;
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (std::size_t i = 0; i < dim_; ++i)
      if (e[i]) t *= ipow(x[i], e[i]);
    if (e[dim_]) t *= ipow(eps, e[dim_]);
    acc += t;
  }
  return acc;
}

double PolyExpr::evaluate(std::span<const double> x, double eps) const {
  require_same_dim(x.size(), dim_, "evaluate");
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c.get_d();
    for (std::size_t i = 0; i < dim_; ++i)
      if (e[i]) t *= ipow(x[i], e[i]);
    if (e[dim_]) t *= ipow(eps, e[dim_]);
    acc += t;
  }
  return acc;
}

PolyExpr& PolyExpr::operator+=(const PolyExpr& o) {
  require_same_dim(dim_, o.dim_, "add");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

PolyExpr& PolyExpr::operator-=(const PolyExpr& o) {
  require_same_dim(dim_, o.dim_, "subtract");
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

PolyExpr& PolyExpr::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

PolyExpr operator*(const PolyExpr& a, const PolyExpr& b) {
  require_same_dim(a.dim_, b.dim_, "multiply");
  PolyExpr out(a.dim_);
  Exponents f(a.dim_ + 1);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = ea[i] + eb[i];
      out.add_term(f, ca * cb);
    }
  return out;
}

PolyExpr PolyExpr::operator-() const {
  PolyExpr out = *this;
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

// ---------------- VectorField ----------------

VectorField::VectorField(std::size_t dim) : components_(dim, PolyExpr(dim)) {}

VectorField::VectorField(std::vector<PolyExpr> components) : components_(std::move(components)) {
  for (const auto& c : components_) require_same_dim(c.dim(), components_.size(), "VectorField");
}

VectorField VectorField::basis(std::size_t dim, std::size_t j) {
  if (j >= dim) throw DimensionError("basis index out of range");
  VectorField X(dim);
  X.components_[j] = PolyExpr::constant(dim, 1);
  return X;
}

bool VectorField::is_zero() const {
  for (const auto& c : components_)
    if (!c.is_zero()) return false;
  return true;
}

bool VectorField::is_x_constant() const {
  for (const auto& c : components_)
    if (!c.is_x_constant()) return false;
  return true;
}

VectorField VectorField::substitute_eps(const Rational& eps) const {
  VectorField out(dim());
  for (std::size_t j = 0; j < dim(); ++j) out.components_[j] = components_[j].substitute_eps(eps);
  return out;
}

std::vector<Rational> VectorField::evaluate(std::span<const Rational> x, const Rational& eps) const {
  std::vector<Rational> out(dim());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = components_[j].evaluate(x, eps);
  return out;
}

std::vector<double> VectorField::evaluate(std::span<const double> x, double eps) const {
  std::vector<double> out(dim());
  for (std::size_t j = 0; j < dim(); ++j) out[j] = components_[j].evaluate(x, eps);
  return out;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_dim(dim(), o.dim(), "add");
  for (std::size_t j = 0; j < dim(); ++j) components_[j] += o.components_[j];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require_same_dim(dim(), o.dim(), "subtract");
  for (std::size_t j = 0; j < dim(); ++j) components_[j] -= o.components_[j];
  return *this;
}

VectorField operator*(const Rational& c, const VectorField& X) {
  VectorField out = X;
  for (auto& comp : out.components_) comp *= c;
  return out;
}

VectorField operator*(const PolyExpr& f, const VectorField& X) {
  require_same_dim(f.dim(), X.dim(), "scale");
  VectorField out(X.dim());
  for (std::size_t j = 0; j < X.dim(); ++j) out.components_[j] = f * X.components_[j];
  return out;
}

VectorField VectorField::operator-() const {
  VectorField out = *this;
  for (auto& comp : out.components_) comp = -comp;
  return out;
}

// ---------------- printing ----------------

std::string to_string(const PolyExpr& p) {
  std::string out;
  for (const auto& [e, c] : p.terms()) append_term(out, c, monomial_string(e), "");
  return out.empty() ? "0" : out;
}

std::string to_string(const VectorField& X) {
  std::string out;
  for (std::size_t j = 0; j < X.dim(); ++j) {
    std::string basis = "d/dx" + std::to_string(j + 1);
    for (const auto& [e, c] : X[j].terms()) append_term(out, c, monomial_string(e), basis);
  }
  return out.empty() ? "0" : out;
}

// ---------------- calculus ----------------

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  require_same_dim(X.dim(), Y.dim(), "lie_bracket");
  const std::size_t d = X.dim();
  VectorField out(d);
  for (std::size_t k = 0; k < d; ++k) {
    bool xk = !X[k].is_zero(), yk = !Y[k].is_zero();
    if (!xk && !yk) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (xk) out[j] += X[k] * Y[j].derivative(k);
      if (yk) out[j] -= Y[k] * X[j].derivative(k);
    }
  }
  return out;
}

PolyExpr divergence(const VectorField& X) {
  PolyExpr out(X.dim());
  for (std::size_t j = 0; j < X.dim(); ++j) out += X[j].derivative(j);
  return out;
}

VectorField ad_power(const VectorField& X, const VectorField& Y, unsigned j) {
  require_same_dim(X.dim(), Y.dim(), "ad_power");
  VectorField out = Y;
  for (unsigned i = 0; i < j; ++i) out = lie_bracket(X, out);
  return out;
}

PolyExpr apply_to_scalar(const VectorField& X, const PolyExpr& f) {
  require_same_dim(X.dim(), f.dim(), "apply_to_scalar");
  PolyExpr out(f.dim());
  for (std::size_t k = 0; k < X.dim(); ++k)
    if (!X[k].is_zero()) out += X[k] * f.derivative(k);
  return out;
}

// ---------------- compiled evaluation ----------------

CompiledPoly::CompiledPoly(const PolyExpr& p, double eps) {
  const std::size_t d = p.dim();
  offsets_.push_back(0);
  for (const auto& [e, c] : p.terms()) {
    double coef = c.get_d() * ipow(eps, e[d]);
    if (coef == 0.0) continue;
    coef_.push_back(coef);
    for (std::size_t i = 0; i < d; ++i)
      if (e[i]) factors_.emplace_back(static_cast<std::uint32_t>(i), e[i]);
    offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
  }
}

double CompiledPoly::operator()(const double* x) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    double v = coef_[t];
    for (std::uint32_t f = offsets_[t]; f < offsets_[t + 1]; ++f) {
      const auto [var, pw] = factors_[f];
      v *= pw == 1 ? x[var] : ipow(x[var], pw);
    }
    acc += v;
  }
  return acc;
}

CompiledField::CompiledField(const VectorField& X, double eps) {
  comps_.reserve(X.dim());
  for (const auto& c : X.components()) comps_.emplace_back(c, eps);
}

void CompiledField::operator()(const double* x, double* out) const {
  for (std::size_t j = 0; j < comps_.size(); ++j) out[j] = comps_[j](x);
}

}  // namespace minorlab::symbolic
