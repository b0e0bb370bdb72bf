#include "minorlab/hormander.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "minorlab/rng.hpp"

namespace minorlab {

namespace {

struct Letter {
  int index;
  VectorField field;
  Rational weight_sq;
};

// Noise letters first so noise-led words win ties in the frontier.
std::vector<Letter> letters(const ModelSpec& m) {
  std::vector<Letter> out;
  for (std::size_t j = 0; j < m.Zs.size(); ++j)
    if (!m.Zs[j].is_zero()) out.push_back({static_cast<int>(j + 1), m.Zs[j].field, m.Zs[j].scale_sq});
  out.push_back({0, m.drift(), Rational(1)});
  return out;
}

bool contains(const std::vector<VectorField>& set, const VectorField& f) {
  for (const auto& g : set)
    if (g == f) return true;
  return false;
}

}  // namespace

std::vector<BracketNode> enumerate_brackets(const ModelSpec& m, unsigned max_depth) {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  const auto alphabet = letters(m);
  std::vector<BracketNode> list, front;
  std::vector<VectorField> listed, seen;
  for (const auto& L : alphabet) {
    BracketNode node{{L.index}, L.field, L.weight_sq};
    if (L.index != 0 && !contains(listed, L.field)) {
      list.push_back(node);
      listed.push_back(L.field);
    }
    seen.push_back(L.field);
    front.push_back(std::move(node));
  }
  for (unsigned depth = 2; depth <= max_depth; ++depth) {
    std::vector<BracketNode> next;
    for (const auto& L : alphabet) {
      for (const auto& w : front) {
        VectorField g = symbolic::lie_bracket(L.field, w.field);
        if (g.is_zero()) continue;
        std::vector<int> word{L.index};
        word.insert(word.end(), w.word.begin(), w.word.end());
        BracketNode node{std::move(word), g, w.weight_sq * L.weight_sq};
        if (L.index != 0 && !contains(listed, g)) {
          list.push_back(node);
          listed.push_back(g);
        }
        if (contains(seen, g) || contains(seen, -g)) continue;
        seen.push_back(g);
        next.push_back(std::move(node));
      }
    }
    front = std::move(next);
    if (front.empty()) break;
  }
  return list;
}

VectorField bracket_from_word(const ModelSpec& m, const std::vector<int>& word) {
  if (word.empty()) throw std::invalid_argument("empty bracket word");
  auto field = [&](int a) -> VectorField {
    if (a == 0) return m.drift();
    if (a < 0 || static_cast<std::size_t>(a) > m.Zs.size()) throw std::invalid_argument("bracket word index out of range");
    return m.Zs[static_cast<std::size_t>(a - 1)].field;
  };
  VectorField acc = field(word.back());
  for (std::size_t i = word.size() - 1; i-- > 0;) acc = symbolic::lie_bracket(field(word[i]), acc);
  return acc;
}

std::size_t exact_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && sgn(rows[piv][c]) == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t i = rank + 1; i < rows.size(); ++i) {
      if (sgn(rows[i][c]) == 0) continue;
      Rational f = rows[i][c] / rows[rank][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

HormanderCertificate hormander_certificate(const ModelSpec& m, unsigned max_depth,
                                           const std::vector<Rational>& eps_grid,
                                           const std::vector<std::vector<Rational>>& x_samples,
                                           const Rational& threshold, const Rational& ratio_bound) {
  if (x_samples.empty()) throw std::invalid_argument("hormander_certificate: empty sample set");
  if (eps_grid.empty()) throw std::invalid_argument("hormander_certificate: empty eps grid");
  for (const auto& e : eps_grid)
    if (sgn(e) <= 0 || e >= 1) throw std::invalid_argument("hormander_certificate: eps grid must lie in (0,1)");
  for (const auto& x : x_samples)
    if (x.size() != m.d) throw symbolic::DimensionError("hormander_certificate: sample dimension mismatch");

  HormanderCertificate cert;
  cert.brackets = enumerate_brackets(m, max_depth);
  cert.eps_grid = eps_grid;
  cert.x_samples = x_samples;
  cert.max_depth = max_depth;
  cert.threshold = threshold;
  cert.ratio_bound = ratio_bound;

  const std::size_t ne = eps_grid.size(), nx = x_samples.size(), nb = cert.brackets.size(), d = m.d;
  std::vector<double> scale(nb);
  for (std::size_t b = 0; b < nb; ++b) scale[b] = std::sqrt(cert.brackets[b].weight_sq.get_d());
  cert.min_singular.assign(ne, std::vector<double>(nx, 0.0));
  std::vector<std::size_t> ranks(ne * nx, 0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < ne * nx; ++k) {
    const std::size_t ei = k / nx, xi = k % nx;
    std::vector<std::vector<Rational>> rows;
    rows.reserve(nb);
    Eigen::MatrixXd M(d, nb);
    for (std::size_t b = 0; b < nb; ++b) {
      rows.push_back(cert.brackets[b].field.evaluate(std::span<const Rational>(x_samples[xi]), eps_grid[ei]));
      for (std::size_t j = 0; j < d; ++j) M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = rows.back()[j].get_d() * scale[b];
    }
    ranks[k] = exact_rank(rows);
    double smin = 0.0;
    if (nb >= d) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
      smin = svd.singularValues()(static_cast<Eigen::Index>(d) - 1);
    }
    cert.min_singular[ei][xi] = ranks[k] < d ? 0.0 : smin;
  }

  cert.per_eps_floor.assign(ne, std::numeric_limits<double>::infinity());
  cert.uniform_floor = std::numeric_limits<double>::infinity();
  for (std::size_t ei = 0; ei < ne; ++ei)
    for (std::size_t xi = 0; xi < nx; ++xi) {
      cert.per_eps_floor[ei] = std::min(cert.per_eps_floor[ei], cert.min_singular[ei][xi]);
      if (ranks[ei * nx + xi] < d) cert.deficiencies.push_back({ei, xi, ranks[ei * nx + xi]});
    }
  double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
  for (double f : cert.per_eps_floor) {
    fmax = std::max(fmax, f);
    fmin = std::min(fmin, f);
  }
  cert.uniform_floor = fmin;
  cert.floor_ratio = fmin > 0 ? fmax / fmin : std::numeric_limits<double>::infinity();
  cert.passes = cert.uniform_floor > threshold.get_d() && cert.floor_ratio < ratio_bound.get_d();
  return cert;
}

std::vector<std::vector<Rational>> sublevel_samples(const ModelSpec& m, const Rational& R, std::size_t count,
                                                    std::uint64_t seed) {
  const std::size_t d = m.d;
  std::vector<std::vector<Rational>> out;
  auto inside = [&](const std::vector<Rational>& x) { return m.H.evaluate(std::span<const Rational>(x), 0) < R; };
  std::vector<Rational> origin(d, Rational(0));
  if (inside(origin)) out.push_back(origin);

  const double Rd = R.get_d();
  for (std::size_t i = 0; i < d; ++i) {
    for (int sgn_ : {1, -1}) {
      // Largest t on a 1/1000 lattice with H(t e_i) <= R/2, found by doubling then bisection.
      auto H_at = [&](double t) {
        std::vector<double> x(d, 0.0);
        x[i] = sgn_ * t;
        return m.H.evaluate(std::span<const double>(x), 0.0);
      };
      double lo = 0.0, hi = 1.0 / 64;
      while (H_at(hi) <= Rd / 2 && hi < 1e6) lo = hi, hi *= 2;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (H_at(mid) <= Rd / 2 ? lo : hi) = mid;
      }
      std::vector<Rational> x(d, Rational(0));
      x[i] = ratio(static_cast<long>(std::floor(lo * 1000)) * sgn_, 1000);
      if (sgn(x[i]) != 0 && inside(x)) out.push_back(x);
    }
  }

  const double B = sublevel_halfwidth(m.H, Rd);
  const long span = static_cast<long>(std::ceil(B * 1000));
  CounterStream rng(seed, StreamPurpose::Samples, 0);
  std::size_t accepted = 0, attempts = 0;
  while (accepted < count && attempts < 2000 * (count + 1)) {
    ++attempts;
    std::vector<Rational> x(d);
    for (std::size_t j = 0; j < d; ++j)
      x[j] = ratio(static_cast<long>(rng.next_below(static_cast<std::uint64_t>(2 * span + 1))) - span, 1000);
    if (!inside(x)) continue;
    out.push_back(std::move(x));
    ++accepted;
  }
  return out;
}

HormanderCertificate hormander_certificate(const ModelSpec& m, const HormanderConfig& cfg) {
  auto samples = sublevel_samples(m, cfg.R, cfg.n_samples, cfg.seed);
  return hormander_certificate(m, cfg.max_depth, cfg.eps_grid, samples, cfg.threshold, cfg.ratio_bound);
}

}  // namespace minorlab
