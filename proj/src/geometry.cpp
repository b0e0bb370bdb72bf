#include "minorlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "minorlab/rng.hpp"

namespace minorlab {

PolytopeSample sample_polytope(std::size_t d, double S, std::size_t N, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("sample_polytope: d >= 2");
  if (N < d + 1) throw std::invalid_argument("sample_polytope: need N >= d+1 vertices for a full-dimensional hull");
  if (!(S > 0) || !std::isfinite(S)) throw std::invalid_argument("sample_polytope: S must be positive");
  PolytopeSample P;
  P.d = d;
  P.S = S;
  P.seed = seed;
  for (std::size_t i = 0; i < N; ++i) {
    CounterStream rng(seed, StreamPurpose::Polytope, i);
    std::vector<double> x(d);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : x) {
        v = rng.next_normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& v : x) v *= S / norm;
    P.vertices.push_back(std::move(x));
  }
  return P;
}

// ---- simplex ----

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kFeasTol = 1e-9;

struct Tableau {
  std::size_t m, ncols;  // ncols excludes the rhs column
  std::vector<std::vector<double>> T;  // m rows of ncols+1
  std::vector<double> cost;            // reduced costs, ncols+1 (last = -objective)
  std::vector<std::size_t> basis;

  void pivot(std::size_t r, std::size_t c) {
    const double p = T[r][c];
    for (auto& v : T[r]) v /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = T[i][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) T[i][j] -= f * T[r][j];
    }
    const double f = cost[c];
    if (f != 0.0)
      for (std::size_t j = 0; j <= ncols; ++j) cost[j] -= f * T[r][j];
    basis[r] = c;
  }

  // Bland's rule over allowed columns. Returns false when unbounded.
  bool run(const std::vector<char>& allowed, std::size_t& iters, std::size_t max_iters) {
    for (;;) {
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j)
        if (allowed[j] && cost[j] < -kPivotTol) {
          enter = j;
          break;
        }
      if (enter == ncols) return true;
      std::size_t leave = m;
      double best = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (T[i][enter] > kPivotTol) {
          const double ratio = T[i][ncols] / T[i][enter];
          if (leave == m || ratio < best - 1e-15 || (std::fabs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
            leave = i;
            best = ratio;
          }
        }
      if (leave == m) return false;
      pivot(leave, enter);
      if (++iters > max_iters) throw LPError("simplex iteration guard exceeded");
    }
  }
};

}  // namespace

LPResult simplex_solve(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c, std::size_t max_iterations) {
  const std::size_t m = A.size();
  if (m == 0 || b.size() != m) throw std::invalid_argument("simplex: A and b must have matching nonzero row counts");
  const std::size_t n = A[0].size();
  if (c.size() != n) throw std::invalid_argument("simplex: cost length mismatch");
  for (const auto& row : A)
    if (row.size() != n) throw std::invalid_argument("simplex: ragged A");
  if (max_iterations == 0) max_iterations = 50 * (m + n) + 1000;

  Tableau tb;
  tb.m = m;
  tb.ncols = n + m;
  tb.T.assign(m, std::vector<double>(tb.ncols + 1, 0.0));
  tb.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = b[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tb.T[i][j] = s * A[i][j];
    tb.T[i][n + i] = 1.0;
    tb.T[i][tb.ncols] = s * b[i];
    tb.basis[i] = n + i;
  }
  // Phase 1: minimize the artificial sum.
  tb.cost.assign(tb.ncols + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= tb.ncols; ++j)
      if (j < n || j == tb.ncols) tb.cost[j] -= tb.T[i][j];
  LPResult res;
  std::vector<char> allowed(tb.ncols, 1);
  tb.run(allowed, res.iterations, max_iterations);
  if (-tb.cost[tb.ncols] > kFeasTol) {
    res.status = LPResult::Status::Infeasible;
    return res;
  }
  // Drive artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(tb.T[i][j]) > 1e-9) {
        tb.pivot(i, j);
        break;
      }
  }
  for (std::size_t j = n; j < tb.ncols; ++j) allowed[j] = 0;
  // Phase 2.
  tb.cost.assign(tb.ncols + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) tb.cost[j] = c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = tb.basis[i];
    const double cb = bj < n ? c[bj] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= tb.ncols; ++j) tb.cost[j] -= cb * tb.T[i][j];
  }
  if (!tb.run(allowed, res.iterations, max_iterations)) {
    res.status = LPResult::Status::Unbounded;
    return res;
  }
  res.status = LPResult::Status::Optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tb.basis[i] < n) res.x[tb.basis[i]] = tb.T[i][tb.ncols];
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

bool hull_contains(const std::vector<std::vector<double>>& V, const std::vector<double>& q) {
  if (V.empty()) return false;
  const std::size_t d = V[0].size(), N = V.size();
  if (q.size() != d) throw std::invalid_argument("hull_contains: dimension mismatch");
  std::vector<std::vector<double>> A(d + 1, std::vector<double>(N));
  std::vector<double> b(d + 1);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < N; ++i) A[k][i] = V[i][k];
    b[k] = q[k];
  }
  std::fill(A[d].begin(), A[d].end(), 1.0);
  b[d] = 1.0;
  return simplex_solve(A, b, std::vector<double>(N, 0.0)).status == LPResult::Status::Optimal;
}

bool hull_contains(const PolytopeSample& P, const std::vector<double>& q) { return hull_contains(P.vertices, q); }

// ---- facets ----

namespace {

using V3 = std::array<double, 3>;

V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
V3 cross(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm3(const V3& a) { return std::sqrt(dot(a, a)); }

std::vector<Facet> facets_2d(const std::vector<std::vector<double>>& p) {
  const std::size_t n = p.size();
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (p[i][1] < p[start][1] || (p[i][1] == p[start][1] && p[i][0] < p[start][0])) start = i;
  auto cr = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (p[a][0] - p[o][0]) * (p[b][1] - p[o][1]) - (p[a][1] - p[o][1]) * (p[b][0] - p[o][0]);
  };
  auto d2 = [&](std::size_t a, std::size_t b) {
    const double dx = p[a][0] - p[b][0], dy = p[a][1] - p[b][1];
    return dx * dx + dy * dy;
  };
  std::vector<std::size_t> hull;
  std::size_t cur = start;
  do {
    hull.push_back(cur);
    std::size_t next = cur == 0 ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == cur) continue;
      const double c = cr(cur, next, i);
      // Keep every other point to the left of cur -> next; prefer the farthest on ties.
      if (c < 0 || (c == 0 && d2(cur, i) > d2(cur, next))) next = i;
    }
    cur = next;
    if (hull.size() > n) throw std::runtime_error("gift wrapping did not close");
  } while (cur != start);
  std::vector<Facet> out;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const std::size_t a = hull[k], b = hull[(k + 1) % hull.size()];
    const double dx = p[b][0] - p[a][0], dy = p[b][1] - p[a][1], len = std::hypot(dx, dy);
    out.push_back({{a, b}, {dy / len, -dx / len}});
  }
  return out;
}

std::vector<Facet> facets_3d(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  std::vector<V3> p(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = {pts[i][0], pts[i][1], pts[i][2]};
    scale = std::max(scale, norm3(p[i]));
  }
  const double tol = 1e-12 * std::max(1.0, scale * scale * scale);
  // Initial tetrahedron.
  std::size_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    if (norm3(sub(p[i], p[i0])) > best) best = norm3(sub(p[i], p[i0])), i1 = i;
  best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = norm3(cross(sub(p[i1], p[i0]), sub(p[i], p[i0])));
    if (a > best) best = a, i2 = i;
  }
  best = 0.0;
  const V3 n012 = cross(sub(p[i1], p[i0]), sub(p[i2], p[i0]));
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(dot(n012, sub(p[i], p[i0])));
    if (v > best) best = v, i3 = i;
  }
  if (best <= tol) throw std::invalid_argument("hull_facets: points are coplanar");

  struct Face {
    std::array<std::size_t, 3> v;
    V3 nrm;
    bool alive = true;
  };
  std::vector<Face> faces;
  V3 centroid{};
  for (std::size_t i : {i0, i1, i2, i3})
    for (int k = 0; k < 3; ++k) centroid[k] += p[i][k] / 4;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    V3 nr = cross(sub(p[b], p[a]), sub(p[c], p[a]));
    if (dot(nr, sub(p[a], centroid)) < 0) {
      std::swap(b, c);
      nr = {-nr[0], -nr[1], -nr[2]};
    }
    faces.push_back({{a, b, c}, nr, true});
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);
  for (std::size_t q = 0; q < n; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (faces[f].alive && dot(faces[f].nrm, sub(p[q], p[faces[f].v[0]])) > tol) visible.push_back(f);
    if (visible.empty()) continue;
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (std::size_t f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) ++edges[{v[e], v[(e + 1) % 3]}];
      faces[f].alive = false;
    }
    for (const auto& [e, cnt] : edges) {
      // A horizon edge appears once; its reverse belongs to a face that stays.
      if (edges.count({e.second, e.first})) continue;
      const std::size_t a = e.first, b = e.second;
      V3 nr = cross(sub(p[b], p[a]), sub(p[q], p[a]));
      faces.push_back({{a, b, q}, nr, true});
    }
  }
  std::vector<Facet> out;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    const double len = norm3(f.nrm);
    out.push_back({{f.v[0], f.v[1], f.v[2]}, {f.nrm[0] / len, f.nrm[1] / len, f.nrm[2] / len}});
  }
  return out;
}

}  // namespace

std::vector<Facet> hull_facets(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw std::invalid_argument("hull_facets: no points");
  const std::size_t d = points[0].size();
  for (const auto& p : points)
    if (p.size() != d) throw std::invalid_argument("hull_facets: mixed dimensions");
  if (d == 2) {
    if (points.size() < 3) throw std::invalid_argument("hull_facets: need >= 3 points in 2-d");
    return facets_2d(points);
  }
  if (d == 3) {
    if (points.size() < 4) throw std::invalid_argument("hull_facets: need >= 4 points in 3-d");
    return facets_3d(points);
  }
  throw std::invalid_argument("hull_facets: facet enumeration is limited to d <= 3");
}

TransversalityReport transversality_check(const PolytopeSample& P, const std::vector<double>& v) {
  if (P.d != 2 && P.d != 3) throw std::invalid_argument("transversality_check: d must be 2 or 3");
  if (v.size() != P.d) throw std::invalid_argument("transversality_check: direction dimension mismatch");
  double vn = 0.0;
  for (double x : v) vn += x * x;
  vn = std::sqrt(vn);
  if (vn == 0.0) throw std::invalid_argument("transversality_check: direction must be nonzero");
  TransversalityReport r;
  const auto facets = hull_facets(P.vertices);
  r.n_facets = facets.size();
  for (const auto& f : facets) {
    double dn = 0.0, nn = 0.0;
    for (std::size_t k = 0; k < P.d; ++k) {
      dn += f.normal[k] * v[k];
      nn += f.normal[k] * f.normal[k];
    }
    if (!(std::fabs(dn) > 1e-9 * std::sqrt(nn) * vn)) r.offenders.push_back(f);
  }
  r.all_transverse = r.offenders.empty();
  return r;
}

double hausdorff_probe_2d(const PolytopeSample& P, std::size_t n_probes) {
  if (P.d != 2) throw std::invalid_argument("hausdorff_probe_2d: d must be 2");
  if (n_probes < 1) throw std::invalid_argument("hausdorff_probe_2d: n_probes >= 1");
  const auto facets = hull_facets(P.vertices);
  const auto& V = P.vertices;
  double worst = 0.0;
  for (std::size_t k = 0; k < n_probes; ++k) {
    const double th = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_probes);
    const double x = P.S * std::cos(th), y = P.S * std::sin(th);
    bool inside = true;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& f : facets) {
      const auto& a = V[f.vertices[0]];
      const auto& b = V[f.vertices[1]];
      if (f.normal[0] * (x - a[0]) + f.normal[1] * (y - a[1]) > 0) inside = false;
      const double ex = b[0] - a[0], ey = b[1] - a[1];
      double t = ((x - a[0]) * ex + (y - a[1]) * ey) / (ex * ex + ey * ey);
      t = std::clamp(t, 0.0, 1.0);
      dist = std::min(dist, std::hypot(x - a[0] - t * ex, y - a[1] - t * ey));
    }
    if (!inside) worst = std::max(worst, dist);
  }
  return worst;
}

SublevelContainment hull_contains_sublevel(const PolytopeSample& P, const symbolic::PolyExpr& H, double R,
                                           std::size_t n_probes, std::uint64_t seed) {
  if (H.dim() != P.d) throw std::invalid_argument("hull_contains_sublevel: H dimension mismatch");
  const symbolic::CompiledPoly h(H, 0.0);
  SublevelContainment r;
  for (std::size_t k = 0; k < n_probes; ++k) {
    CounterStream rng(seed, StreamPurpose::Samples, 0x9e0 + k);
    std::vector<double> u(P.d), x(P.d);
    double nn = 0.0;
    for (auto& c : u) {
      c = rng.next_normal();
      nn += c * c;
    }
    nn = std::sqrt(nn);
    for (auto& c : u) c /= nn;
    auto at = [&](double t) {
      for (std::size_t i = 0; i < P.d; ++i) x[i] = t * u[i];
      return h(x.data());
    };
    double hi = 1.0;
    while (at(hi) < R) {
      hi *= 2;
      if (hi > 1e8) throw std::invalid_argument("hull_contains_sublevel: sublevel set unbounded along a ray");
    }
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (at(mid) < R ? lo : hi) = mid;
    }
    at(lo);
    ++r.n_probes;
    if (hull_contains(P, x))
      ++r.n_inside;
    else if (!r.first_outside)
      r.first_outside = x;
  }
  r.contained = r.n_inside == r.n_probes;
  return r;
}

}  // namespace minorlab
