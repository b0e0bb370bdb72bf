#include "minorlab/smallset.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace minorlab {

// ---- exact matrices ----

ExactMatrix ExactMatrix::identity(std::size_t n) {
  ExactMatrix m;
  m.n = n;
  m.num.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) m.num[i * n + i] = 1;
  return m;
}

ExactMatrix ExactMatrix::from_rationals(std::size_t n, const std::vector<Rational>& e) {
  if (e.size() != n * n) throw std::invalid_argument("ExactMatrix: entry count mismatch");
  ExactMatrix m;
  m.n = n;
  m.den = 1;
  for (const auto& q : e) mpz_lcm(m.den.get_mpz_t(), m.den.get_mpz_t(), q.get_den_mpz_t());
  m.num.resize(n * n);
  for (std::size_t i = 0; i < e.size(); ++i) m.num[i] = e[i].get_num() * (m.den / e[i].get_den());
  return m;
}

Rational ExactMatrix::at(std::size_t i, std::size_t j) const {
  Rational q(num[i * n + j], den);
  q.canonicalize();
  return q;
}

bool ExactMatrix::equals(const ExactMatrix& o) const {
  if (n != o.n) return false;
  for (std::size_t i = 0; i < num.size(); ++i)
    if (num[i] * o.den != o.num[i] * den) return false;
  return true;
}

ExactMatrix operator*(const ExactMatrix& a, const ExactMatrix& b) {
  if (a.n != b.n) throw std::invalid_argument("ExactMatrix product: size mismatch");
  const std::size_t n = a.n;
  ExactMatrix c;
  c.n = n;
  c.den = a.den * b.den;
  c.num.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Integer& aik = a.num[i * n + k];
      if (sgn(aik) == 0) continue;
      for (std::size_t j = 0; j < n; ++j) mpz_addmul(c.num[i * n + j].get_mpz_t(), aik.get_mpz_t(), b.num[k * n + j].get_mpz_t());
    }
  // Strip the common factor so sizes stay proportional to the true denominator.
  Integer g = c.den;
  for (const auto& x : c.num) {
    if (g == 1) break;
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
  }
  if (g != 1) {
    c.den /= g;
    for (auto& x : c.num) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
  }
  return c;
}

ExactMatrix matrix_power(const ExactMatrix& a, std::uint64_t e) {
  ExactMatrix result = ExactMatrix::identity(a.n), base = a;
  while (e) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

// ---- kernel families ----

void KernelFamily::validate() const {
  if (n_states == 0) throw std::invalid_argument("kernel family has no states");
  if (times.empty()) throw std::invalid_argument("kernel family has no times");
  if (P.size() != times.size()) throw std::invalid_argument("kernel family: one matrix per time required");
  if (levels.size() != n_states) throw std::invalid_argument("kernel family: one level per state required");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 1) throw std::invalid_argument("kernel family: times must be >= 1");
    if (k && times[k] <= times[k - 1]) throw std::invalid_argument("kernel family: times must be sorted and distinct");
    if (P[k].size() != n_states * n_states) throw std::invalid_argument("kernel family: matrix size mismatch");
    const Rational tol = ratio(1, 1000000000000L);
    for (std::size_t i = 0; i < n_states; ++i) {
      Rational s = 0;
      for (std::size_t j = 0; j < n_states; ++j) {
        const auto& p = P[k][i * n_states + j];
        if (sgn(p) < 0)
          throw std::invalid_argument("kernel family: negative entry at t=" + std::to_string(times[k]) + ", (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        s += p;
      }
      if (rational_abs(s - 1) > tol)
        throw std::invalid_argument("kernel family: row " + std::to_string(i) + " at t=" + std::to_string(times[k]) +
                                    " sums to " + minorlab::to_string(s));
    }
  }
}

const std::vector<Rational>& KernelFamily::at_time(long t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) throw std::invalid_argument("kernel family has no time " + std::to_string(t));
  return P[static_cast<std::size_t>(it - times.begin())];
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

long parse_index(const std::string& s, std::size_t line) {
  Rational q = parse_rational(s);
  if (q.get_den() != 1 || sgn(q) < 0 || !q.get_num().fits_slong_p())
    throw std::invalid_argument("kernel csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  return q.get_num().get_si();
}

}  // namespace

KernelFamily load_kernel_csv(std::istream& in, std::vector<Rational> levels, std::size_t n_states) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("kernel csv is empty");
  if (split_csv(line) != std::vector<std::string>{"t", "i", "j", "p"})
    throw std::invalid_argument("kernel csv header must be t,i,j,p");
  std::map<long, std::map<std::pair<long, long>, Rational>> rows;
  std::size_t lineno = 1;
  long max_state = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 4) throw std::invalid_argument("kernel csv line " + std::to_string(lineno) + ": expected 4 fields");
    const long t = parse_index(f[0], lineno), i = parse_index(f[1], lineno), j = parse_index(f[2], lineno);
    Rational p;
    try {
      p = parse_rational(f[3]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("kernel csv line " + std::to_string(lineno) + ": " + e.what());
    }
    auto [it, fresh] = rows[t].emplace(std::make_pair(i, j), p);
    if (!fresh) throw std::invalid_argument("kernel csv line " + std::to_string(lineno) + ": duplicate entry");
    max_state = std::max({max_state, i, j});
  }
  if (rows.empty()) throw std::invalid_argument("kernel csv has no entries");
  KernelFamily k;
  k.n_states = n_states ? n_states : static_cast<std::size_t>(max_state + 1);
  if (static_cast<std::size_t>(max_state) >= k.n_states) throw std::invalid_argument("kernel csv: state index out of range");
  for (const auto& [t, entries] : rows) {
    k.times.push_back(t);
    std::vector<Rational> m(k.n_states * k.n_states, Rational(0));
    for (const auto& [ij, p] : entries) m[static_cast<std::size_t>(ij.first) * k.n_states + static_cast<std::size_t>(ij.second)] = p;
    k.P.push_back(std::move(m));
  }
  k.levels = levels.empty() ? std::vector<Rational>(k.n_states, Rational(0)) : std::move(levels);
  k.validate();
  return k;
}

void write_kernel_csv(const KernelFamily& k, std::ostream& out) {
  out << "t,i,j,p\n";
  for (std::size_t a = 0; a < k.times.size(); ++a)
    for (std::size_t i = 0; i < k.n_states; ++i)
      for (std::size_t j = 0; j < k.n_states; ++j) {
        const auto& p = k.P[a][i * k.n_states + j];
        if (sgn(p) != 0) out << k.times[a] << ',' << i << ',' << j << ',' << to_string(p) << '\n';
      }
}

namespace {

KernelFamily powers_family(std::size_t n, const std::vector<Rational>& P1, long max_time) {
  if (max_time < 1) throw std::invalid_argument("fixture: max_time >= 1");
  KernelFamily k;
  k.n_states = n;
  k.levels.assign(n, Rational(0));
  const ExactMatrix M = ExactMatrix::from_rationals(n, P1);
  ExactMatrix cur = M;
  for (long t = 1; t <= max_time; ++t) {
    if (t > 1) cur = cur * M;
    k.times.push_back(t);
    std::vector<Rational> e(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e[i * n + j] = cur.at(i, j);
    k.P.push_back(std::move(e));
  }
  k.validate();
  return k;
}

}  // namespace

KernelFamily lazy_walk_fixture(std::size_t n, const Rational& jitter, long max_time) {
  if (n < 2) throw std::invalid_argument("lazy walk fixture: n >= 2");
  if (sgn(jitter) < 0 || jitter > 1) throw std::invalid_argument("lazy walk fixture: jitter in [0,1]");
  std::vector<Rational> W(n * n, Rational(0));
  const Rational half = ratio(1, 2), quarter = ratio(1, 4);
  for (std::size_t i = 0; i < n; ++i) {
    W[i * n + i] += half;
    W[i * n + (i == 0 ? 0 : i - 1)] += quarter;
    W[i * n + (i + 1 == n ? i : i + 1)] += quarter;
  }
  const Rational spread = jitter / static_cast<long>(n);
  std::vector<Rational> P(n * n);
  for (std::size_t i = 0; i < n * n; ++i) P[i] = (1 - jitter) * W[i] + spread;
  return powers_family(n, P, max_time);
}

KernelFamily disconnected_fixture(long max_time) {
  const Rational h = ratio(1, 2);
  std::vector<Rational> P(16, Rational(0));
  for (std::size_t a : {0u, 2u})
    for (std::size_t i = a; i < a + 2; ++i)
      for (std::size_t j = a; j < a + 2; ++j) P[i * 4 + j] = h;
  return powers_family(4, P, max_time);
}

// ---- pipeline ----

PetiteReport petite_check(const KernelFamily& k, const std::vector<std::size_t>& G, const std::optional<Rational>& c_R,
                          const std::optional<Rational>& C_R) {
  PetiteReport r;
  const std::size_t n = k.n_states;
  bool first = true;
  for (std::size_t x : G)
    for (std::size_t y : G) {
      Rational s = 0;
      for (const auto& P : k.P) s += P[x * n + y];
      if (first || s < r.min_sum) {
        r.min_sum = s;
        r.witness_x = x;
        r.witness_y = y;
      }
      first = false;
    }
  first = true;
  for (std::size_t a = 0; a < k.times.size(); ++a)
    for (std::size_t x : G)
      for (std::size_t y : G) {
        const auto& p = k.P[a][x * n + y];
        if (first || p > r.max_entry) {
          r.max_entry = p;
          r.max_x = x;
          r.max_y = y;
          r.max_t = k.times[a];
        }
        first = false;
      }
  const Rational c = c_R ? *c_R : r.min_sum;
  r.holds = true;
  if (sgn(c) <= 0 || r.min_sum < c) {
    r.holds = false;
    r.failure = "petite condition fails: sum over times of P_t(" + std::to_string(r.witness_x) + "," +
                std::to_string(r.witness_y) + ") = " + to_string(r.min_sum) + " < c_R = " + to_string(sgn(c) > 0 ? c : Rational(0));
    if (sgn(c) <= 0) r.failure += " (c_R must be positive)";
  } else if (C_R && r.max_entry > *C_R) {
    r.holds = false;
    r.failure = "max entry P_" + std::to_string(r.max_t) + "(" + std::to_string(r.max_x) + "," + std::to_string(r.max_y) +
                ") = " + to_string(r.max_entry) + " exceeds C_R = " + to_string(*C_R);
  }
  return r;
}

namespace {

struct Family {
  const KernelFamily& k;
  std::size_t n;
  const Rational& p(std::size_t a, std::size_t i, std::size_t j) const { return k.P[a][i * n + j]; }
  Rational mass(std::size_t a, std::size_t i, const std::vector<std::size_t>& to) const {
    Rational s = 0;
    for (std::size_t j : to) s += p(a, i, j);
    return s;
  }
  Rational mass_into(std::size_t a, const std::vector<std::size_t>& from, std::size_t j) const {
    Rational s = 0;
    for (std::size_t i : from) s += p(a, i, j);
    return s;
  }
};

Rational pow_rational(const Rational& q, std::size_t e) {
  Rational r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= q;
  return r;
}

// P_t composed greedily from the largest family times.
ExactMatrix route_kernel(const KernelFamily& k, const std::vector<ExactMatrix>& M, long t) {
  ExactMatrix acc = ExactMatrix::identity(k.n_states);
  long rem = t;
  for (std::size_t a = k.times.size(); a-- > 0 && rem > 0;)
    while (rem >= k.times[a]) {
      acc = acc * M[a];
      rem -= k.times[a];
    }
  return acc;
}

}  // namespace

SmallSetResult small_set_pipeline(const KernelFamily& k, const SmallSetConfig& cfg) {
  k.validate();
  SmallSetResult r;
  const std::size_t n = k.n_states;
  for (std::size_t i = 0; i < n; ++i)
    if (k.levels[i] < cfg.R) r.H_R.push_back(i);
  if (r.H_R.empty()) throw PipelineError("empty", "no state has level below R = " + to_string(cfg.R), r);
  const auto& G = r.H_R;

  r.petite = petite_check(k, G, cfg.c_R, cfg.C_R);
  if (!r.petite.holds) throw PipelineError("petite", r.petite.failure, r);
  r.c_R = cfg.c_R ? *cfg.c_R : r.petite.min_sum;
  r.C_R = cfg.C_R ? *cfg.C_R : r.petite.max_entry;

  // Compositions below assume a semigroup sampled at the family times.
  if (k.times.front() != 1) throw PipelineError("inconsistent", "kernel family must contain t = 1", r);
  std::vector<ExactMatrix> M;
  for (const auto& P : k.P) M.push_back(ExactMatrix::from_rationals(n, P));
  for (std::size_t a = 1; a < k.times.size(); ++a)
    if (!matrix_power(M[0], static_cast<std::uint64_t>(k.times[a])).equals(M[a]))
      throw PipelineError("inconsistent", "P_" + std::to_string(k.times[a]) + " differs from P_1^" +
                                              std::to_string(k.times[a]) + "; the family is not a semigroup",
                          r);

  const Family F{k, n};
  const std::size_t T = k.times.size();
  const Rational nT = static_cast<long>(T);

  auto min_on = [&](const ExactMatrix& m, const std::vector<std::size_t>& S, std::size_t& ax, std::size_t& ay) {
    Rational best;
    bool first = true;
    for (std::size_t x : S)
      for (std::size_t y : S) {
        Rational q = m.at(x, y);
        if (first || q < best) {
          best = q;
          ax = x;
          ay = y;
        }
        first = false;
      }
    return best;
  };

  std::optional<std::size_t> direct;
  if (cfg.prefer_direct)
    for (std::size_t a = 0; a < T && !direct; ++a) {
      bool pos = true;
      for (std::size_t x : G)
        for (std::size_t y : G) pos = pos && sgn(F.p(a, x, y)) > 0;
      if (pos) direct = a;
    }

  if (direct) {
    r.route = "direct";
    std::size_t ax = 0, ay = 0;
    r.E = G;
    r.t_star = k.times[*direct];
    r.delta = min_on(M[*direct], G, ax, ay);
    r.t0 = r.t_star;
    r.lambda = r.delta;
  } else {
    r.route = "constructive";
    // Two-step search: maximize min(P_t(u,v), P_tau(v,w)).
    r.delta4 = r.c_R * r.c_R / (nT * nT * r.C_R);
    bool found = false;
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b)
        for (std::size_t v : G) {
          std::size_t bu = G.front(), bw = G.front();
          for (std::size_t u : G)
            if (F.p(a, u, v) > F.p(a, bu, v)) bu = u;
          for (std::size_t w : G)
            if (F.p(b, v, w) > F.p(b, v, bw)) bw = w;
          const Rational val = std::min(Rational(F.p(a, bu, v)), Rational(F.p(b, v, bw)));
          if (!found || val > r.delta_achieved) {
            r.delta_achieved = val;
            r.t = k.times[a];
            r.tau = k.times[b];
            r.u = bu;
            r.v = v;
            r.w = bw;
            found = true;
          }
        }
    if (r.delta_achieved < r.delta4)
      throw PipelineError("threshold", "no (t,tau,u,v,w) reaches the derived threshold " + to_string(r.delta4) +
                                           "; achieved maximum " + to_string(r.delta_achieved),
                          r);
    const std::size_t ia = static_cast<std::size_t>(std::lower_bound(k.times.begin(), k.times.end(), r.t) - k.times.begin());
    const std::size_t ib = static_cast<std::size_t>(std::lower_bound(k.times.begin(), k.times.end(), r.tau) - k.times.begin());
    for (std::size_t x : G) {
      if (F.p(ia, x, r.v) >= r.delta4) r.E1.push_back(x);
      if (F.p(ib, r.v, x) >= r.delta4) r.E2.push_back(x);
    }
    r.t1 = r.t + r.tau;
    r.delta2 = r.delta4 * r.delta4;

    // Return from E2 to E1 at a single family time, then no-concentration on E2.
    std::vector<Rational> mass(T);
    std::size_t a2 = 0;
    for (std::size_t a = 0; a < T; ++a) {
      for (std::size_t x : r.E2) mass[a] += F.mass(a, x, r.E1);
      if (mass[a] > mass[a2]) a2 = a;
    }
    r.t2 = k.times[a2];
    std::vector<Rational> f, wts(r.E2.size(), Rational(1));
    Rational fmax = 0;
    for (std::size_t x : r.E2) {
      f.push_back(F.mass(a2, x, r.E1));
      if (f.back() > fmax) fmax = f.back();
    }
    const LowerBoundSet lb = lower_bound_set(f, wts, mass[a2], fmax, Rational(2));
    r.delta3 = lb.threshold;
    r.mass_bound = lb.measure_bound;
    for (std::size_t i : lb.set) r.E.push_back(r.E2[i]);
    r.t_star = r.t1 + r.t2;
    r.delta = r.delta2 * r.delta3;

    // Good times: E -> E mass at each family time.
    const Rational nE = static_cast<long>(r.E.size());
    std::vector<Rational> g(T), tw(T, Rational(1));
    Rational gmax = 0;
    for (std::size_t a = 0; a < T; ++a) {
      for (std::size_t x : r.E) g[a] += F.mass(a, x, r.E);
      if (g[a] > gmax) gmax = g[a];
    }
    const LowerBoundSet gl = lower_bound_set(g, tw, r.c_R * nE * nE, gmax, Rational(2));
    r.delta_good = gl.threshold;
    for (std::size_t a : gl.set) r.good_times.push_back(k.times[a]);
    r.delta1 = r.delta * r.delta * r.delta_good;
    r.delta_a1 = r.delta * r.c_R * nE / nT;

    // Entry into E from every H_R state and exit from E to every H_R state.
    const Rational entry = r.c_R * nE / nT;
    for (std::size_t x : G) {
      Rational best_in = 0, best_out = 0;
      for (std::size_t a = 0; a < T; ++a) {
        best_in = std::max(best_in, F.mass(a, x, r.E));
        best_out = std::max(best_out, F.mass_into(a, r.E, x));
      }
      if (best_in < entry || best_out < entry)
        throw PipelineError("verification", "state " + std::to_string(x) + " has no family time reaching the entry bound", r);
    }

    // Block of consecutive integers in nS, S = good_times + 2 t_star.
    std::vector<long> B;
    const long smin = r.good_times.front() + 2 * r.t_star;
    for (long u : r.good_times) B.push_back(u + 2 * r.t_star - smin);
    const IntSet Bset(B);
    const long W = 2 * (k.times.back() - k.times.front());
    long g0 = 0;
    for (long b : B) g0 = std::gcd(g0, b);
    const std::size_t Msz = Bset.size();
    std::size_t nn = 1;
    if (Msz >= 3 && g0 == 1) {
      nn = lev_block(Bset, 1).min_n;
      nn = std::max<std::size_t>({nn, 1, static_cast<std::size_t>((W + 1 + static_cast<long>(Msz) - 2) / (static_cast<long>(Msz) - 1))});
    } else if (W != 0) {
      throw PipelineError("periodic", "good return times " + std::to_string(Msz) +
                                          " do not satisfy the sumset hypotheses (need >= 3 times with gcd 1)",
                          r);
    }
    const LevResult lev = lev_block(Bset, nn);
    r.lev_n = nn;
    r.lev_M = lev.M;
    r.lev_ell = lev.ell;
    r.lev_hypotheses_ok = lev.hypotheses_ok;
    r.block_length = lev.longest_run;
    if (lev.longest_run < static_cast<std::size_t>(W + 1))
      throw PipelineError("periodic", "longest block in the sumset is " + std::to_string(lev.longest_run) + " < " +
                                          std::to_string(W + 1),
                          r);
    r.block_start = lev.run_start + static_cast<long>(nn) * smin;
    const long hi = r.t_star + 2 * k.times.back();
    r.t0 = hi + r.block_start;
    r.lambda = r.delta_a1 * pow_rational(r.delta1, nn) * pow_rational(nE, nn + 1) * r.c_R / nT;
  }

  // Independent verification: binary powering of P_1 versus composition from the family times.
  const ExactMatrix Pt0 = matrix_power(M[0], static_cast<std::uint64_t>(r.t0));
  r.bit_exact = Pt0.equals(route_kernel(k, M, r.t0));
  r.verified_min = min_on(Pt0, G, r.verified_x, r.verified_y);
  std::size_t sx = 0, sy = 0;
  r.small_set_min = min_on(matrix_power(M[0], static_cast<std::uint64_t>(r.t_star)), r.E, sx, sy);
  r.verified = r.bit_exact && r.verified_min >= r.lambda && r.small_set_min >= r.delta && sgn(r.lambda) > 0;
  if (!r.verified)
    throw PipelineError("verification", "claimed lambda " + to_string(r.lambda) + " at t0 = " + std::to_string(r.t0) +
                                            " not confirmed (min " + to_string(r.verified_min) + ")",
                        r);
  return r;
}

}  // namespace minorlab
