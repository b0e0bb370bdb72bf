#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minorlab/markov.hpp"
#include "minorlab/rational.hpp"

namespace minorlab {

// Square matrix num / den with integer numerators; products never reduce,
// so every composition order gives the same exact value.
struct ExactMatrix {
  std::size_t n = 0;
  std::vector<Integer> num;  // row-major
  Integer den{1};

  static ExactMatrix identity(std::size_t n);
  static ExactMatrix from_rationals(std::size_t n, const std::vector<Rational>& entries);
  Rational at(std::size_t i, std::size_t j) const;
  // Same value (as rationals) entrywise.
  bool equals(const ExactMatrix& o) const;
};

ExactMatrix operator*(const ExactMatrix& a, const ExactMatrix& b);
ExactMatrix matrix_power(const ExactMatrix& a, std::uint64_t e);

struct KernelFamily {
  std::size_t n_states = 0;
  std::vector<long> times;               // sorted, distinct, >= 1
  std::vector<std::vector<Rational>> P;  // per time, row-major n x n
  std::vector<Rational> levels;          // per-state H value

  void validate() const;
  const std::vector<Rational>& at_time(long t) const;
};

// CSV with header t,i,j,p (0-based states, p as a decimal or p/q). Missing
// entries are zero. levels defaults to all zeros when empty.
KernelFamily load_kernel_csv(std::istream& in, std::vector<Rational> levels = {}, std::size_t n_states = 0);
void write_kernel_csv(const KernelFamily& k, std::ostream& out);

// Reflected lazy walk on n states (stay 1/2, step 1/4 each way, reflect at the
// ends), mixed as (1 - jitter) W + jitter / n; times 1..max_time as exact powers.
KernelFamily lazy_walk_fixture(std::size_t n, const Rational& jitter, long max_time);
// Two closed pairs {0,1} and {2,3}, each uniform within itself.
KernelFamily disconnected_fixture(long max_time = 3);

struct PetiteReport {
  bool holds = false;
  Rational min_sum;  // min over H_R pairs of sum_t P_t(x,y)
  std::size_t witness_x = 0, witness_y = 0;
  Rational max_entry;
  std::size_t max_x = 0, max_y = 0;
  long max_t = 0;
  std::string failure;
};

struct SmallSetConfig {
  Rational R{1};
  std::optional<Rational> c_R, C_R;  // measured from the family when absent
  bool prefer_direct = true;         // use a single family time when one is already positive on H_R x H_R
};

struct SmallSetResult {
  std::string route;  // "direct" or "constructive"
  std::vector<std::size_t> H_R;
  PetiteReport petite;
  Rational c_R, C_R;

  // Two-step search.
  long t = 0, tau = 0;
  std::size_t u = 0, v = 0, w = 0;
  Rational delta4, delta_achieved;
  std::vector<std::size_t> E1, E2;
  long t1 = 0;
  Rational delta2;
  // Small set.
  long t2 = 0;
  Rational delta3, mass_bound;
  std::vector<std::size_t> E;
  long t_star = 0;
  Rational delta;
  // Good return times and the sumset block.
  std::vector<long> good_times;
  Rational delta_good, delta1, delta_a1;
  std::size_t lev_n = 0, lev_M = 0;
  long lev_ell = 0;
  bool lev_hypotheses_ok = false;
  long block_start = 0;
  std::size_t block_length = 0;
  // Final claim.
  long t0 = 0;
  Rational lambda;
  // Verification by independent composition.
  Rational verified_min;
  std::size_t verified_x = 0, verified_y = 0;
  Rational small_set_min;
  bool bit_exact = false;
  bool verified = false;
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& kind, const std::string& what, SmallSetResult partial)
      : std::runtime_error(what), kind_(kind), partial_(std::move(partial)) {}
  const std::string& kind() const { return kind_; }
  const SmallSetResult& partial() const { return partial_; }

 private:
  std::string kind_;
  SmallSetResult partial_;
};

PetiteReport petite_check(const KernelFamily& k, const std::vector<std::size_t>& states,
                          const std::optional<Rational>& c_R, const std::optional<Rational>& C_R);

// Throws PipelineError (petite, threshold, periodic, inconsistent, verification).
SmallSetResult small_set_pipeline(const KernelFamily& k, const SmallSetConfig& cfg);

}  // namespace minorlab
