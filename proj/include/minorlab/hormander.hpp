#pragma once

#include <cstdint>
#include <vector>

#include "minorlab/models.hpp"

namespace minorlab {

// word = (j1, ..., jm): field = [X_j1, [X_j2, ... X_jm]], j1 a noise index
// (1-based), inner indices in {0..r} with 0 the drift -eps Z + Z0.
struct BracketNode {
  std::vector<int> word;
  VectorField field;
  // Product of the noise scale_sq factors along the word.
  Rational weight_sq{1};

  std::size_t depth() const { return word.size(); }
};

struct Deficiency {
  std::size_t eps_index = 0;
  std::size_t x_index = 0;
  std::size_t rank = 0;
};

struct HormanderCertificate {
  std::vector<BracketNode> brackets;
  std::vector<Rational> eps_grid;
  std::vector<std::vector<Rational>> x_samples;
  // min_singular[e][x]
  std::vector<std::vector<double>> min_singular;
  std::vector<double> per_eps_floor;
  double uniform_floor = 0.0;
  double floor_ratio = 0.0;
  unsigned max_depth = 0;
  Rational threshold, ratio_bound;
  std::vector<Deficiency> deficiencies;
  bool passes = false;
};

struct HormanderConfig {
  unsigned max_depth = 2;
  std::vector<Rational> eps_grid = {Rational(1, 1000), Rational(1, 100), Rational(1, 10), Rational(999, 1000)};
  Rational threshold{1, 1000000};
  Rational ratio_bound{1000};
  // Sample placement inside H_R.
  Rational R{1};
  std::size_t n_samples = 64;
  std::uint64_t seed = 1;
};

std::vector<BracketNode> enumerate_brackets(const ModelSpec& m, unsigned max_depth);

// Recomputes a node's field from its word.
VectorField bracket_from_word(const ModelSpec& m, const std::vector<int>& word);

HormanderCertificate hormander_certificate(const ModelSpec& m, unsigned max_depth,
                                           const std::vector<Rational>& eps_grid,
                                           const std::vector<std::vector<Rational>>& x_samples,
                                           const Rational& threshold, const Rational& ratio_bound);

// The origin (when inside), axis points and seeded random rationals, all with H < R.
std::vector<std::vector<Rational>> sublevel_samples(const ModelSpec& m, const Rational& R, std::size_t count,
                                                    std::uint64_t seed);

HormanderCertificate hormander_certificate(const ModelSpec& m, const HormanderConfig& cfg);

// Exact rank of a rational matrix (rows are vectors).
std::size_t exact_rank(std::vector<std::vector<Rational>> rows);

}  // namespace minorlab
