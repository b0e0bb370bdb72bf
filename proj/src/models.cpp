#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "minorlab/models.hpp"

namespace minorlab {

using symbolic::parse_field;
using symbolic::parse_scalar;

namespace {

const std::vector<std::string> kCommonKeys = {"name", "eta", "dstar"};

std::vector<std::string> family_keys(std::string_view family) {
  if (family == "langevin") return {"n", "U"};
  if (family == "langevin_aniso") return {"n", "U", "T"};
  if (family == "oscillator_chain") return {"n", "k", "j", "gamma1", "gamman", "T1", "Tn"};
  if (family == "lorenz96") return {"d", "lambda", "sigma"};
  if (family == "fluid_generic") return {"d", "lambda", "B"};
  throw ModelError("unknown model family '" + std::string(family) + "'");
}

class Params {
 public:
  Params(std::string_view family, const ModelParams& raw) : raw_(raw) {
    auto keys = family_keys(family);
    keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
    for (const auto& [k, v] : raw)
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ModelError("unknown parameter '" + k + "' for family " + std::string(family));
  }

  bool has(const std::string& k) const { return raw_.count(k) != 0; }
  std::string str(const std::string& k, const std::string& def) const {
    auto it = raw_.find(k);
    return it == raw_.end() ? def : it->second;
  }
  Rational rational(const std::string& k, std::optional<Rational> def = std::nullopt) const {
    auto it = raw_.find(k);
    if (it == raw_.end()) {
      if (!def) throw ModelError("missing parameter '" + k + "'");
      return *def;
    }
    try {
      return parse_rational(it->second);
    } catch (const std::invalid_argument&) {
      throw ModelError("parameter '" + k + "' is not a rational number: " + it->second);
    }
  }
  long integer(const std::string& k, std::optional<long> def = std::nullopt) const {
    Rational q = rational(k, def ? std::optional<Rational>(Rational(*def)) : std::nullopt);
    if (q.get_den() != 1 || !q.get_num().fits_slong_p())
      throw ModelError("parameter '" + k + "' must be an integer");
    return q.get_num().get_si();
  }
  std::vector<Rational> list(const std::string& k, std::size_t n) const {
    auto it = raw_.find(k);
    if (it == raw_.end()) throw ModelError("missing parameter '" + k + "'");
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<Rational> out;
    for (std::string tok; in >> tok;) {
      try {
        out.push_back(parse_rational(tok));
      } catch (const std::invalid_argument&) {
        throw ModelError("parameter '" + k + "' has a non-rational entry: " + tok);
      }
    }
    if (out.size() != n)
      throw ModelError("parameter '" + k + "' needs " + std::to_string(n) + " entries, got " +
                       std::to_string(out.size()));
    return out;
  }

 private:
  const ModelParams& raw_;
};

// sqrt(s) * d/dx_j with perfect squares folded in.
NoiseField scaled_basis(std::size_t d, std::size_t j, const Rational& s) {
  if (auto root = exact_sqrt(s)) return NoiseField{*root * VectorField::basis(d, j), 1};
  return NoiseField{VectorField::basis(d, j), s};
}

PolyExpr sum_of_squares(std::size_t d, std::size_t from, std::size_t to, const Rational& c) {
  PolyExpr out(d);
  for (std::size_t i = from; i < to; ++i) out += c * PolyExpr::variable(d, i).pow(2);
  return out;
}

void apply_overrides(ModelSpec& m, const Params& p) {
  m.name = p.str("name", m.family);
  if (p.has("eta")) m.eta = p.rational("eta");
  if (p.has("dstar")) m.dstar = p.rational("dstar");
  if (sgn(m.eta) <= 0) throw ModelError("eta must be positive");
  if (sgn(m.dstar) <= 0) throw ModelError("dstar must be positive");
  if (m.H.degree() % 2 != 0) throw ModelError("H must have even total degree");
  if (m.H.eps_degree() != 0) throw ModelError("H must not depend on eps");
}

// Positions x1..xn, velocities v1..vn = x_{n+1}..x_{2n}.
ModelSpec hamiltonian_chain(std::size_t n, const PolyExpr& U) {
  const std::size_t d = 2 * n;
  ModelSpec m;
  m.d = d;
  m.Z0 = VectorField(d);
  for (std::size_t i = 0; i < n; ++i) {
    m.Z0[i] = PolyExpr::variable(d, n + i);
    m.Z0[n + i] = -U.derivative(i);
  }
  m.H = sum_of_squares(d, n, d, Rational(1, 2)) + U;
  return m;
}

PolyExpr checked_potential(const Params& p, std::size_t n) {
  const std::size_t d = 2 * n;
  std::string text = p.str("U", "");
  PolyExpr U(d);
  if (text.empty()) {
    U = sum_of_squares(d, 0, n, Rational(1, 2));
  } else {
    try {
      U = parse_scalar(text, d);
    } catch (const std::exception& e) {
      throw ModelError(std::string("potential U: ") + e.what());
    }
  }
  for (const auto& [e, c] : U.terms()) {
    for (std::size_t i = n; i <= d; ++i)
      if (e[i]) throw ModelError("potential U may depend on positions x1..xn only");
  }
  if (U.degree() < 2 || U.degree() % 2 != 0) throw ModelError("potential U needs even degree >= 2");
  return U;
}

std::size_t checked_size(const Params& p, const std::string& key, long def, long min) {
  long v = p.integer(key, def);
  if (v < min) throw ModelError("parameter '" + key + "' must be >= " + std::to_string(min));
  if (v > 64) throw ModelError("parameter '" + key + "' is too large");
  return static_cast<std::size_t>(v);
}

ModelSpec build_langevin(const Params& p, bool aniso) {
  const std::size_t n = checked_size(p, "n", 1, 1);
  PolyExpr U = checked_potential(p, n);
  ModelSpec m = hamiltonian_chain(n, U);
  const std::size_t d = m.d;
  m.family = aniso ? "langevin_aniso" : "langevin";
  m.Z = VectorField(d);
  for (std::size_t i = 0; i < n; ++i) m.Z[n + i] = PolyExpr::variable(d, n + i);
  std::vector<Rational> T(n, Rational(1));
  if (aniso) T = p.list("T", n);
  Rational tmax = 0, tsum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sgn(T[i]) <= 0) throw ModelError("temperatures must be positive");
    m.Zs.push_back(scaled_basis(d, n + i, T[i]));
    m.params["T" + std::to_string(i + 1)] = T[i];
    tmax = std::max(tmax, T[i]);
    tsum += T[i];
  }
  m.r = n;
  m.params["n"] = Rational(static_cast<long>(n));
  m.eta = 1 / tmax;
  m.dstar = 2 * tsum;
  auto cert = integrability_certificate(m.H, m.H_pieces);
  if (!cert.certified) throw ModelError("potential U is not certified coercive: " + cert.detail);
  return m;
}

ModelSpec build_oscillator(const Params& p) {
  const std::size_t n = checked_size(p, "n", 2, 2);
  const long k = p.integer("k", 1), j = p.integer("j", 1);
  if (k < 1 || j < k) throw ModelError("oscillator needs integers j >= k >= 1");
  if (j > 16) throw ModelError("oscillator exponent j is too large");
  const Rational g1 = p.rational("gamma1", Rational(1)), gn = p.rational("gamman", Rational(1));
  const Rational T1 = p.rational("T1", Rational(1)), Tn = p.rational("Tn", Rational(1));
  if (sgn(g1) <= 0 || sgn(gn) <= 0) throw ModelError("friction coefficients must be positive");
  if (sgn(T1) <= 0 || sgn(Tn) <= 0) throw ModelError("temperatures must be positive");
  const std::size_t d = 2 * n;

  PolyExpr U(d);
  std::vector<EvenPowerPiece> pieces;
  for (std::size_t l = 0; l < n; ++l) U += PolyExpr::variable(d, l).pow(static_cast<std::uint32_t>(2 * k));
  for (std::size_t l = 0; l + 1 < n; ++l) {
    EvenPowerPiece piece{Rational(1), std::vector<Rational>(d, Rational(0)), static_cast<unsigned>(2 * j)};
    piece.linear[l] = 1;
    piece.linear[l + 1] = -1;
    U += piece.expand(d);
    pieces.push_back(piece);
  }
  ModelSpec m = hamiltonian_chain(n, U);
  m.family = "oscillator_chain";
  m.H_pieces = pieces;
  m.Z = VectorField(d);
  m.Z[n] = g1 * PolyExpr::variable(d, n);
  m.Z[d - 1] = gn * PolyExpr::variable(d, d - 1);
  m.Zs = {scaled_basis(d, n, g1 * T1), scaled_basis(d, d - 1, gn * Tn)};
  m.r = 2;
  m.eta = 1 / std::max(T1, Tn);
  m.dstar = 2 * (g1 * T1 + gn * Tn);
  m.params = {{"n", Rational(static_cast<long>(n))}, {"k", Rational(k)}, {"j", Rational(j)},
              {"gamma1", g1}, {"gamman", gn}, {"T1", T1}, {"Tn", Tn}};
  return m;
}

// sum_i (x_{i+1} - x_{i-2}) x_{i-1} d/dx_i on the discrete circle.
VectorField lorenz_nonlinearity(std::size_t d) {
  VectorField B(d);
  auto x = [&](long i) { return PolyExpr::variable(d, static_cast<std::size_t>(((i % (long)d) + (long)d) % (long)d)); };
  for (long i = 0; i < static_cast<long>(d); ++i) B[static_cast<std::size_t>(i)] = (x(i + 1) - x(i - 2)) * x(i - 1);
  return B;
}

ModelSpec build_lorenz(const Params& p) {
  const std::size_t d = checked_size(p, "d", 4, 4);
  auto lambda = p.list("lambda", d), sigma = p.list("sigma", d);
  for (std::size_t i = 0; i < d; ++i) {
    if (sgn(lambda[i]) < 0) throw ModelError("lambda entries must be nonnegative");
    bool driven = (i == 0 || i == 2);
    if (driven && sgn(lambda[i]) <= 0) throw ModelError("lorenz96 needs lambda1 > 0 and lambda3 > 0");
    if (driven && sgn(sigma[i]) <= 0) throw ModelError("lorenz96 needs sigma1 > 0 and sigma3 > 0");
    if (!driven && sgn(sigma[i]) != 0) throw ModelError("lorenz96 needs sigma_i = 0 for i not in {1,3}");
  }
  ModelSpec m;
  m.family = "lorenz96";
  m.d = d;
  m.Z = VectorField(d);
  for (std::size_t i = 0; i < d; ++i) m.Z[i] = lambda[i] * PolyExpr::variable(d, i);
  m.Z0 = lorenz_nonlinearity(d);
  for (std::size_t i = 0; i < d; ++i) m.Zs.push_back(NoiseField{sigma[i] * VectorField::basis(d, i), 1});
  m.r = d;
  m.H = sum_of_squares(d, 0, d, 1);
  m.eta = std::min(lambda[0] / (2 * sigma[0] * sigma[0]), lambda[2] / (2 * sigma[2] * sigma[2]));
  Rational s2 = 0;
  for (const auto& s : sigma) s2 += s * s;
  m.dstar = 4 * s2;
  m.params["d"] = Rational(static_cast<long>(d));
  for (std::size_t i = 0; i < d; ++i) {
    m.params["lambda" + std::to_string(i + 1)] = lambda[i];
    m.params["sigma" + std::to_string(i + 1)] = sigma[i];
  }
  return m;
}

ModelSpec build_fluid(const Params& p) {
  const std::size_t d = checked_size(p, "d", 4, 2);
  auto lambda = p.list("lambda", d);
  Rational trace = 0;
  for (const auto& l : lambda) {
    if (sgn(l) < 0) throw ModelError("Lambda must be nonnegative definite");
    trace += l;
  }
  if (sgn(trace) <= 0) throw ModelError("Lambda needs positive trace");
  VectorField B(d);
  if (p.has("B")) {
    try {
      B = parse_field(p.str("B", ""), d);
    } catch (const std::exception& e) {
      throw ModelError(std::string("field B: ") + e.what());
    }
  } else if (d >= 4) {
    B = lorenz_nonlinearity(d);
  } else {
    throw ModelError("fluid_generic needs B for d < 4");
  }
  for (const auto& c : B.components())
    if (c.eps_degree() != 0) throw ModelError("field B must not depend on eps");
  PolyExpr divB = symbolic::divergence(B);
  if (!divB.is_zero()) throw ModelError("div(B) != 0: div(B) = " + symbolic::to_string(divB));
  PolyExpr Bx(d);
  for (std::size_t i = 0; i < d; ++i) Bx += B[i] * PolyExpr::variable(d, i);
  if (!Bx.is_zero()) throw ModelError("B(x).x != 0: B(x).x = " + symbolic::to_string(Bx));

  ModelSpec m;
  m.family = "fluid_generic";
  m.d = d;
  m.Z = VectorField(d);
  for (std::size_t i = 0; i < d; ++i) {
    m.Z[i] = lambda[i] * PolyExpr::variable(d, i);
    m.Zs.push_back(scaled_basis(d, i, lambda[i]));
    m.params["lambda" + std::to_string(i + 1)] = lambda[i];
  }
  m.Z0 = B;
  m.r = d;
  m.H = sum_of_squares(d, 0, d, 1);
  m.eta = Rational(1, 2);
  m.dstar = 4 * trace;
  m.params["d"] = Rational(static_cast<long>(d));
  return m;
}

}  // namespace

PolyExpr EvenPowerPiece::expand(std::size_t dim) const {
  PolyExpr L(dim);
  for (std::size_t i = 0; i < linear.size(); ++i) L += linear[i] * PolyExpr::variable(dim, i);
  return coef * L.pow(power);
}

VectorField ModelSpec::drift() const { return Z0 - PolyExpr::eps(d) * Z; }

VectorField ModelSpec::drift(const Rational& eps) const { return drift().substitute_eps(eps); }

const std::vector<std::string>& model_families() {
  static const std::vector<std::string> f = {"langevin", "langevin_aniso", "oscillator_chain", "lorenz96",
                                             "fluid_generic"};
  return f;
}

std::vector<std::string> model_param_keys(std::string_view family) {
  auto keys = family_keys(family);
  keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

ModelSpec build_model(std::string_view family, const ModelParams& params) {
  Params p(family, params);
  ModelSpec m;
  if (family == "langevin")
    m = build_langevin(p, false);
  else if (family == "langevin_aniso")
    m = build_langevin(p, true);
  else if (family == "oscillator_chain")
    m = build_oscillator(p);
  else if (family == "lorenz96")
    m = build_lorenz(p);
  else
    m = build_fluid(p);
  apply_overrides(m, p);
  return m;
}

PolyExpr generator_apply(const ModelSpec& m, const PolyExpr& f) {
  const PolyExpr eps = PolyExpr::eps(m.d);
  PolyExpr out = symbolic::apply_to_scalar(m.Z0, f) - eps * symbolic::apply_to_scalar(m.Z, f);
  for (const auto& z : m.Zs) {
    if (z.is_zero()) continue;
    PolyExpr wf = symbolic::apply_to_scalar(z.field, f);
    out += z.scale_sq * (eps * symbolic::apply_to_scalar(z.field, wf));
  }
  return out;
}

// ---------------- integrability ----------------

namespace {

// Exact Gaussian elimination; true iff the symmetric matrix is positive definite.
bool positive_definite(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (sgn(a[k][k]) <= 0) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (sgn(a[i][k]) == 0) continue;
      Rational f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return true;
}

}  // namespace

IntegrabilityReport integrability_certificate(const PolyExpr& H, const std::vector<EvenPowerPiece>& pieces) {
  const std::size_t d = H.dim();
  IntegrabilityReport rep;
  if (H.eps_degree() != 0) {
    rep.method = "none";
    rep.detail = "H depends on eps";
    return rep;
  }
  const std::uint32_t deg = H.degree();
  if (deg == 0 || deg % 2 != 0) {
    rep.method = "none";
    rep.detail = "H does not have even positive total degree";
    return rep;
  }
  if (deg == 2) {
    std::vector<std::vector<Rational>> Q(d, std::vector<Rational>(d, Rational(0)));
    for (const auto& [e, c] : H.terms()) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < d; ++i)
        for (std::uint32_t t = 0; t < e[i]; ++t) idx.push_back(i);
      if (idx.size() != 2) continue;
      if (idx[0] == idx[1])
        Q[idx[0]][idx[0]] += c;
      else {
        Q[idx[0]][idx[1]] += c / 2;
        Q[idx[1]][idx[0]] += c / 2;
      }
    }
    if (positive_definite(Q)) {
      rep.certified = true;
      rep.method = "quadratic-leading-form";
      rep.detail = "leading quadratic form is positive definite";
      return rep;
    }
  }
  // Newton-simplex domination after removing manifestly nonnegative pieces.
  PolyExpr core = H;
  for (const auto& piece : pieces) {
    if (sgn(piece.coef) <= 0 || piece.power % 2 != 0 || piece.linear.size() != d) {
      rep.method = "none";
      rep.detail = "malformed nonnegative piece";
      return rep;
    }
    core -= piece.expand(d);
  }
  std::vector<std::uint32_t> m(d, 0);
  for (const auto& [e, c] : core.terms()) {
    std::size_t nz = 0, which = 0;
    for (std::size_t i = 0; i < d; ++i)
      if (e[i]) ++nz, which = i;
    if (nz == 1 && e[which] % 2 == 0 && sgn(c) > 0) m[which] = std::max(m[which], e[which]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (m[i] == 0) {
      rep.method = "none";
      rep.detail = "no positive even pure power of x" + std::to_string(i + 1);
      return rep;
    }
  }
  for (const auto& [e, c] : core.terms()) {
    Rational s = 0;
    bool all_even = true;
    for (std::size_t i = 0; i < d; ++i) {
      s += ratio(static_cast<long>(e[i]), static_cast<long>(m[i]));
      all_even = all_even && e[i] % 2 == 0;
    }
    if (s < 1 || (all_even && sgn(c) > 0)) continue;
    rep.method = "none";
    rep.detail = "monomial on or outside the Newton simplex: " + symbolic::to_string([&] {
      PolyExpr t(d);
      t.add_term(e, c);
      return t;
    }());
    return rep;
  }
  rep.certified = true;
  rep.method = "newton-simplex";
  rep.detail = "pure even powers dominate every other monomial";
  return rep;
}

// ---------------- sublevel geometry ----------------

namespace {

bool boundary_probes_ok(const PolyExpr& H, const std::vector<double>& lo, const std::vector<double>& hi,
                        double level) {
  const std::size_t d = lo.size();
  const std::size_t q = d <= 2 ? 41 : d <= 3 ? 13 : d <= 4 ? 7 : d <= 6 ? 5 : 3;
  std::vector<double> x(d);
  std::vector<std::size_t> idx(d > 0 ? d - 1 : 0, 0);
  for (std::size_t axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        for (std::size_t i = 0, k = 0; i < d; ++i) {
          if (i == axis) {
            x[i] = side ? hi[i] : lo[i];
          } else {
            x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[k]) / static_cast<double>(q - 1);
            ++k;
          }
        }
        if (H.evaluate(std::span<const double>(x), 0.0) < level) return false;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == q) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }
  return true;
}

}  // namespace

bool box_covers_sublevel(const PolyExpr& H, const std::vector<double>& lo, const std::vector<double>& hi,
                         double level) {
  if (lo.size() != H.dim() || hi.size() != H.dim()) throw symbolic::DimensionError("box dimension mismatch");
  return boundary_probes_ok(H, lo, hi, level);
}

double sublevel_halfwidth(const PolyExpr& H, double level) {
  const std::size_t d = H.dim();
  for (double b = 0.125; b < 1e7; b *= 2) {
    std::vector<double> lo(d, -b), hi(d, b);
    if (boundary_probes_ok(H, lo, hi, level)) return b;
  }
  throw ModelError("sublevel set appears unbounded");
}

}  // namespace minorlab
