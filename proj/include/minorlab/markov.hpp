#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minorlab/rational.hpp"

namespace minorlab {

// ---- no-concentration bound ----

struct LowerBoundSet {
  Rational threshold;       // c / (K |D|)
  Rational measure_bound;   // c (1 - 1/K) / (C - c/(K |D|))
  Rational measure;         // measure of the returned set
  std::vector<std::size_t> set;  // indices with f >= threshold
  bool bound_holds = false;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// f and w (atom measures) on a finite space D; |D| = sum w.
LowerBoundSet lower_bound_set(const std::vector<Rational>& f, const std::vector<Rational>& w, const Rational& c,
                              const Rational& C, const Rational& K);

// ---- interval unions ----

struct Interval {
  Rational lo, hi;
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// Sorted, pairwise disjoint closed intervals; touching or overlapping inputs are merged.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts);

  const std::vector<Interval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }
  Rational measure() const;
  bool contains(const Interval& i) const;
  bool operator==(const IntervalSet& o) const { return parts_ == o.parts_; }
  std::string to_string() const;

 private:
  std::vector<Interval> parts_;
};

IntervalSet interval_sumset(const IntervalSet& a, const IntervalSet& b);
// n-fold sumset by repeated addition.
IntervalSet nfold_sumset(const IntervalSet& a, std::size_t n);

// ceil(20 L / eta) + 2; requires 0 < eta <= L.
std::size_t steinhaus_n(const Rational& eta, const Rational& L);

struct SteinhausResult {
  std::size_t n = 0;
  std::optional<Interval> unit;  // [a, a+1] inside nA
  std::size_t sumset_intervals = 0;
};

// Requires A inside [0, L] with measure >= eta.
SteinhausResult steinhaus_verify(const IntervalSet& A, const Rational& eta, const Rational& L);
// Closed unit interval inside nA, if any.
std::optional<Interval> steinhaus_verify(const IntervalSet& A, std::size_t n);

// ---- integer sumsets ----

// Sorted distinct nonnegative integers.
class IntSet {
 public:
  IntSet() = default;
  explicit IntSet(std::vector<long> v);
  const std::vector<long>& values() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  long min() const { return v_.front(); }
  long max() const { return v_.back(); }

 private:
  std::vector<long> v_;
};

struct LevResult {
  IntSet sumset;
  std::size_t longest_run = 0;
  long run_start = 0;  // first element of the first longest run
  long ell = 0;
  std::size_t M = 0;
  std::size_t min_n = 0;  // 2 ceil((ell-1)/(M-2)) when M >= 3
  bool hypotheses_ok = false;
  bool block_bound_holds = false;  // longest_run >= n (M-1); meaningful when hypotheses_ok
};

// n-fold sumset of B and its longest run of consecutive integers. The
// hypotheses are evaluated with ell = max B (or the given ell) and M = #B.
LevResult lev_block(const IntSet& B, std::size_t n, std::optional<long> ell = std::nullopt);

// ---- seeded and exhaustive sweeps ----

// Union of closed intervals with endpoints on the 1/1000 lattice inside
// [0, L], grown until its measure reaches eta. Fixture stream (seed, index).
IntervalSet random_interval_union(const Rational& L, const Rational& eta, std::uint64_t seed, std::uint64_t index);

struct SteinhausSweep {
  std::size_t n_sets = 0, failures = 0;
  std::size_t n = 0;
  std::optional<std::size_t> first_failure;
  std::size_t max_sumset_intervals = 0;
};

SteinhausSweep steinhaus_sweep(std::size_t n_sets, const Rational& L, const Rational& eta, std::uint64_t seed);

struct LevSweep {
  long max_element = 0;
  std::size_t n_subsets = 0, n_admissible = 0, failures = 0;
  std::vector<std::vector<long>> failing;
};

// Every B within {0..max_element} with the hypotheses met at its minimal n.
LevSweep lev_exhaustive(long max_element);

struct NoConcentrationSweep {
  std::size_t n_instances = 0, violations = 0;
  std::optional<std::size_t> first_violation;
};

// Random finite instances (f, w, c, C, K) meeting the preconditions, with
// c = integral of f and C = max f; counts instances whose bound fails.
NoConcentrationSweep no_concentration_sweep(std::size_t n_instances, std::uint64_t seed);

}  // namespace minorlab
