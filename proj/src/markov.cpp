#include "minorlab/markov.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "minorlab/rng.hpp"

namespace minorlab {

LowerBoundSet lower_bound_set(const std::vector<Rational>& f, const std::vector<Rational>& w, const Rational& c,
                              const Rational& C, const Rational& K) {
  if (f.empty() || f.size() != w.size()) throw PreconditionError("lower_bound_set: f and w must be nonempty and equally long");
  if (K < 2) throw PreconditionError("lower_bound_set: K must be >= 2, got " + to_string(K));
  if (sgn(c) <= 0) throw PreconditionError("lower_bound_set: c must be positive");
  Rational D = 0, integral = 0, fmax = f[0];
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (sgn(w[i]) <= 0) throw PreconditionError("lower_bound_set: atom " + std::to_string(i) + " has nonpositive measure");
    if (sgn(f[i]) < 0) throw PreconditionError("lower_bound_set: f is negative at " + std::to_string(i));
    D += w[i];
    integral += f[i] * w[i];
    if (f[i] > fmax) fmax = f[i];
  }
  if (integral < c)
    throw PreconditionError("lower_bound_set: integral of f is " + to_string(integral) + " < c = " + to_string(c));
  if (fmax > C) throw PreconditionError("lower_bound_set: max f = " + to_string(fmax) + " > C = " + to_string(C));
  LowerBoundSet r;
  r.threshold = c / (K * D);
  r.measure_bound = c * (1 - 1 / K) / (C - r.threshold);
  r.measure = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] >= r.threshold) {
      r.set.push_back(i);
      r.measure += w[i];
    }
  r.bound_holds = r.measure >= r.measure_bound;
  return r;
}

IntervalSet::IntervalSet(std::vector<Interval> parts) {
  for (const auto& p : parts)
    if (p.lo > p.hi) throw std::invalid_argument("interval with lo > hi: [" + minorlab::to_string(p.lo) + ", " +
                                                 minorlab::to_string(p.hi) + "]");
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (auto& p : parts) {
    if (!parts_.empty() && p.lo <= parts_.back().hi) {
      if (p.hi > parts_.back().hi) parts_.back().hi = p.hi;
    } else {
      parts_.push_back(std::move(p));
    }
  }
}

Rational IntervalSet::measure() const {
  Rational m = 0;
  for (const auto& p : parts_) m += p.hi - p.lo;
  return m;
}

bool IntervalSet::contains(const Interval& i) const {
  for (const auto& p : parts_)
    if (p.lo <= i.lo && i.hi <= p.hi) return true;
  return false;
}

std::string IntervalSet::to_string() const {
  if (parts_.empty()) return "{}";
  std::string s;
  for (const auto& p : parts_) {
    if (!s.empty()) s += " U ";
    s += "[" + minorlab::to_string(p.lo) + ", " + minorlab::to_string(p.hi) + "]";
  }
  return s;
}

IntervalSet interval_sumset(const IntervalSet& a, const IntervalSet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("interval_sumset: empty operand");
  std::vector<Interval> parts;
  parts.reserve(a.size() * b.size());
  for (const auto& x : a.intervals())
    for (const auto& y : b.intervals()) parts.push_back({x.lo + y.lo, x.hi + y.hi});
  return IntervalSet(std::move(parts));
}

IntervalSet nfold_sumset(const IntervalSet& a, std::size_t n) {
  if (n < 1) throw std::invalid_argument("nfold_sumset: n >= 1");
  IntervalSet s = a;
  for (std::size_t k = 1; k < n; ++k) s = interval_sumset(s, a);
  return s;
}

std::size_t steinhaus_n(const Rational& eta, const Rational& L) {
  if (sgn(eta) <= 0) throw PreconditionError("steinhaus_n: eta must be positive");
  if (eta > L) throw PreconditionError("steinhaus_n: eta = " + to_string(eta) + " exceeds L = " + to_string(L));
  return ceil_rational(20 * L / eta).get_ui() + 2;
}

std::optional<Interval> steinhaus_verify(const IntervalSet& A, std::size_t n) {
  const IntervalSet s = nfold_sumset(A, n);
  for (const auto& p : s.intervals())
    if (p.hi - p.lo >= 1) return Interval{p.lo, p.lo + 1};
  return std::nullopt;
}

SteinhausResult steinhaus_verify(const IntervalSet& A, const Rational& eta, const Rational& L) {
  if (A.empty()) throw PreconditionError("steinhaus: A is empty");
  if (sgn(A.intervals().front().lo) < 0 || A.intervals().back().hi > L)
    throw PreconditionError("steinhaus: A is not contained in [0, L]");
  if (A.measure() < eta)
    throw PreconditionError("steinhaus: measure(A) = " + to_string(A.measure()) + " < eta = " + to_string(eta));
  SteinhausResult r;
  r.n = steinhaus_n(eta, L);
  const IntervalSet s = nfold_sumset(A, r.n);
  r.sumset_intervals = s.size();
  for (const auto& p : s.intervals())
    if (p.hi - p.lo >= 1) {
      r.unit = Interval{p.lo, p.lo + 1};
      break;
    }
  return r;
}

IntSet::IntSet(std::vector<long> v) : v_(std::move(v)) {
  std::sort(v_.begin(), v_.end());
  v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
  if (!v_.empty() && v_.front() < 0) throw std::invalid_argument("IntSet holds nonnegative integers only");
}

LevResult lev_block(const IntSet& B, std::size_t n, std::optional<long> ell) {
  if (n < 1) throw std::invalid_argument("lev_block: n >= 1");
  LevResult r;
  if (B.empty()) return r;
  r.ell = ell ? *ell : B.max();
  if (r.ell < B.max()) throw std::invalid_argument("lev_block: B is not contained in [0, ell]");
  r.M = B.size();
  long g = 0;
  for (long b : B.values()) g = std::gcd(g, b - B.min());
  if (r.M >= 3) {
    const long num = std::max(0L, r.ell - 1), den = static_cast<long>(r.M) - 2;
    r.min_n = static_cast<std::size_t>(2 * ((num + den - 1) / den));
  }
  r.hypotheses_ok = r.ell >= 1 && r.M >= 3 && g == 1 && n >= r.min_n;

  // Reachability table for sums of exactly n elements.
  const std::size_t top = n * static_cast<std::size_t>(B.max());
  std::vector<char> cur(top + 1, 0), nxt(top + 1, 0);
  cur[0] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::fill(nxt.begin(), nxt.end(), 0);
    for (std::size_t s = 0; s <= top; ++s)
      if (cur[s])
        for (long b : B.values())
          if (s + static_cast<std::size_t>(b) <= top) nxt[s + static_cast<std::size_t>(b)] = 1;
    std::swap(cur, nxt);
  }
  std::vector<long> sums;
  for (std::size_t s = 0; s <= top; ++s)
    if (cur[s]) sums.push_back(static_cast<long>(s));
  r.sumset = IntSet(sums);
  std::size_t run = 0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    run = (i > 0 && sums[i] == sums[i - 1] + 1) ? run + 1 : 1;
    if (run > r.longest_run) {
      r.longest_run = run;
      r.run_start = sums[i] - static_cast<long>(run) + 1;
    }
  }
  r.block_bound_holds = r.M >= 1 && r.longest_run >= n * (r.M - 1);
  return r;
}

}  // namespace minorlab

namespace minorlab {

namespace {

Rational lattice(std::uint64_t k) { return ratio(static_cast<long>(k), 1000); }

std::uint64_t thousandths_floor(const Rational& q) {
  Integer v = q.get_num() * 1000 / q.get_den();
  return v.get_ui();
}

}  // namespace

IntervalSet random_interval_union(const Rational& L, const Rational& eta, std::uint64_t seed, std::uint64_t index) {
  if (sgn(eta) <= 0 || eta > L) throw std::invalid_argument("random_interval_union: need 0 < eta <= L");
  CounterStream rng(seed, StreamPurpose::Fixture, index);
  const std::uint64_t L_units = thousandths_floor(L);
  const std::uint64_t eta_units = std::max<std::uint64_t>(2, thousandths_floor(eta));
  std::vector<Interval> parts;
  IntervalSet A;
  for (int guard = 0; A.measure() < eta; ++guard) {
    if (guard > 10000) {
      parts.push_back({Rational(0), eta});
    } else {
      const std::uint64_t lo = rng.next_below(L_units);
      const std::uint64_t len = 1 + rng.next_below(eta_units / 2);
      parts.push_back({lattice(lo), lattice(std::min(lo + len, L_units))});
    }
    A = IntervalSet(parts);
  }
  return A;
}

SteinhausSweep steinhaus_sweep(std::size_t n_sets, const Rational& L, const Rational& eta, std::uint64_t seed) {
  SteinhausSweep s;
  s.n_sets = n_sets;
  s.n = steinhaus_n(eta, L);
  for (std::size_t i = 0; i < n_sets; ++i) {
    const IntervalSet A = random_interval_union(L, eta, seed, i);
    const SteinhausResult r = steinhaus_verify(A, eta, L);
    s.max_sumset_intervals = std::max(s.max_sumset_intervals, r.sumset_intervals);
    if (!r.unit) {
      ++s.failures;
      if (!s.first_failure) s.first_failure = i;
    }
  }
  return s;
}

LevSweep lev_exhaustive(long max_element) {
  if (max_element < 1 || max_element > 20) throw std::invalid_argument("lev_exhaustive: max_element in [1, 20]");
  LevSweep s;
  s.max_element = max_element;
  const unsigned long n_masks = 1UL << (max_element + 1);
  for (unsigned long mask = 1; mask < n_masks; ++mask) {
    std::vector<long> b;
    for (long k = 0; k <= max_element; ++k)
      if (mask >> k & 1UL) b.push_back(k);
    ++s.n_subsets;
    const IntSet B(b);
    const LevResult probe = lev_block(B, 1);
    if (probe.min_n == 0) continue;
    const LevResult r = lev_block(B, probe.min_n);
    if (!r.hypotheses_ok) continue;
    ++s.n_admissible;
    if (!r.block_bound_holds) {
      ++s.failures;
      s.failing.push_back(b);
    }
  }
  return s;
}

NoConcentrationSweep no_concentration_sweep(std::size_t n_instances, std::uint64_t seed) {
  NoConcentrationSweep s;
  s.n_instances = n_instances;
  for (std::size_t i = 0; i < n_instances; ++i) {
    CounterStream rng(seed, StreamPurpose::Fixture, i);
    const std::size_t k = 1 + rng.next_below(12);
    std::vector<Rational> f(k), w(k);
    Rational integral = 0, fmax = 0;
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = ratio(static_cast<long>(1 + rng.next_below(20)), 10);
      f[j] = ratio(static_cast<long>(rng.next_below(101)), 25);
      integral += f[j] * w[j];
      if (f[j] > fmax) fmax = f[j];
    }
    if (sgn(integral) == 0) {
      f[0] = 1;
      integral = w[0];
      fmax = std::max(fmax, Rational(1));
    }
    // c anywhere in (0, integral], C anywhere in [max f, 2 max f].
    const Rational c = integral * ratio(static_cast<long>(1 + rng.next_below(100)), 100);
    const Rational C = fmax * (1 + ratio(static_cast<long>(rng.next_below(101)), 100));
    const Rational K = 2 + ratio(static_cast<long>(rng.next_below(9)), 2);
    const LowerBoundSet r = lower_bound_set(f, w, c, C, K);
    if (!r.bound_holds) {
      ++s.violations;
      if (!s.first_violation) s.first_violation = i;
    }
  }
  return s;
}

}  // namespace minorlab
