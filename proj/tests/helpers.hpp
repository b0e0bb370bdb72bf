#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "minorlab/models.hpp"
#include "minorlab/rng.hpp"

namespace testing {

using minorlab::ModelSpec;
using minorlab::Rational;
using minorlab::symbolic::PolyExpr;
using minorlab::symbolic::VectorField;

inline ModelSpec linear_langevin(std::size_t n = 1) {
  return minorlab::build_model("langevin", {{"n", std::to_string(n)}});
}

inline ModelSpec lorenz4(const std::string& eta = "") {
  minorlab::ModelParams p = {{"d", "4"}, {"lambda", "1, 0, 1, 0"}, {"sigma", "1, 0, 1, 0"}};
  if (!eta.empty()) p["eta"] = eta;
  return minorlab::build_model("lorenz96", p);
}

inline ModelSpec oscillator3() {
  return minorlab::build_model("oscillator_chain",
                               {{"n", "3"}, {"k", "1"}, {"j", "1"}, {"T1", "1"}, {"Tn", "2"}});
}

inline ModelSpec fluid4() {
  return minorlab::build_model("fluid_generic", {{"d", "4"}, {"lambda", "1, 1, 1, 1"}});
}

// Random polynomial of total degree <= deg with small rational coefficients.
inline PolyExpr random_poly(std::size_t dim, unsigned deg, minorlab::CounterStream& s) {
  PolyExpr p(dim);
  const std::size_t terms = 1 + s.next_below(4);
  for (std::size_t t = 0; t < terms; ++t) {
    minorlab::symbolic::Exponents e(dim + 1, 0);
    unsigned budget = static_cast<unsigned>(s.next_below(deg + 1));
    while (budget--) ++e[s.next_below(dim)];
    if (s.next_below(4) == 0) e[dim] = 1;
    long num = static_cast<long>(s.next_below(11)) - 5;
    long den = 1 + static_cast<long>(s.next_below(4));
    p.add_term(e, minorlab::ratio(num, den));
  }
  return p;
}

inline VectorField random_field(std::size_t dim, unsigned deg, minorlab::CounterStream& s) {
  VectorField X(dim);
  for (std::size_t j = 0; j < dim; ++j) X[j] = random_poly(dim, deg, s);
  return X;
}

}  // namespace testing
