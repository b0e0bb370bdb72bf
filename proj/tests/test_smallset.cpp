#include <doctest.h>

#include <sstream>

#include "minorlab/smallset.hpp"

using namespace minorlab;

namespace {

KernelFamily uniform2() {
  KernelFamily k;
  k.n_states = 2;
  k.times = {1};
  k.P = {std::vector<Rational>(4, Rational(1, 2))};
  k.levels = {Rational(0), Rational(0)};
  return k;
}

}  // namespace

TEST_CASE("exact matrices") {
  ExactMatrix a = ExactMatrix::from_rationals(2, {Rational(1, 2), Rational(1, 2), Rational(1, 3), Rational(2, 3)});
  CHECK(a.at(1, 0) == Rational(1, 3));
  CHECK((a * ExactMatrix::identity(2)).equals(a));
  ExactMatrix a3 = matrix_power(a, 3);
  CHECK(a3.equals((a * a) * a));
  CHECK(a3.equals(a * (a * a)));
  Rational row = a3.at(0, 0) + a3.at(0, 1);
  CHECK(row == 1);
}

TEST_CASE("kernel CSV round trip") {
  KernelFamily k = lazy_walk_fixture(5, Rational(1, 1000), 3);
  std::ostringstream out;
  write_kernel_csv(k, out);
  CHECK(out.str().rfind("t,i,j,p\n", 0) == 0);
  std::istringstream in(out.str());
  KernelFamily back = load_kernel_csv(in, {}, 5);
  CHECK(back.times == k.times);
  CHECK(back.P == k.P);
}

TEST_CASE("kernel CSV rejects rows that are not stochastic") {
  std::istringstream in("t,i,j,p\n1,0,0,1/2\n1,1,1,1\n");
  CHECK_THROWS(load_kernel_csv(in, {}, 2));
}

TEST_CASE("uniform two-state kernel") {
  KernelFamily k = uniform2();
  SmallSetResult d = small_set_pipeline(k, SmallSetConfig{});
  CHECK(d.route == "direct");
  CHECK(d.E == std::vector<std::size_t>{0, 1});
  CHECK(d.t_star == 1);
  CHECK(d.delta == Rational(1, 2));
  CHECK(d.t0 == 1);
  CHECK(d.lambda == Rational(1, 2));
  CHECK(d.verified);
  // The constructive route reaches a weaker but verified constant on the same kernel.
  SmallSetConfig cfg;
  cfg.prefer_direct = false;
  SmallSetResult r = small_set_pipeline(k, cfg);
  CHECK(r.route == "constructive");
  CHECK(r.verified);
  CHECK(r.bit_exact);
  CHECK(r.lambda > 0);
  CHECK(r.lambda <= d.lambda);
}

TEST_CASE("50-state lazy walk: constructive route verified by matrix powers") {
  KernelFamily k = lazy_walk_fixture(50, Rational(1, 1000), 10);
  SmallSetConfig cfg;
  cfg.prefer_direct = false;
  SmallSetResult r = small_set_pipeline(k, cfg);
  CHECK(r.route == "constructive");
  CHECK(r.petite.holds);
  CHECK(r.lambda > 0);
  CHECK(r.verified);
  CHECK(r.bit_exact);
  // Independent check: P_1^{t0} from scratch, min entry over H_R x E.
  ExactMatrix P = ExactMatrix::from_rationals(50, k.at_time(1));
  ExactMatrix Pt = matrix_power(P, static_cast<std::uint64_t>(r.t0));
  Rational mn = Pt.at(r.H_R[0], r.E[0]);
  for (auto x : r.H_R)
    for (auto y : r.E) mn = std::min(mn, Pt.at(x, y));
  CHECK(mn >= r.lambda);
  CHECK(mn == r.verified_min);
}

TEST_CASE("disconnected fixture fails the petite precondition") {
  KernelFamily k = disconnected_fixture();
  try {
    small_set_pipeline(k, SmallSetConfig{});
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    CHECK(e.kind() == "petite");
    const PetiteReport& p = e.partial().petite;
    CHECK_FALSE(p.holds);
    CHECK(p.min_sum == 0);
    const bool cross = (p.witness_x < 2) != (p.witness_y < 2);
    CHECK(cross);
  }
}

TEST_CASE("petite check reports the smallest summed entry") {
  KernelFamily k = uniform2();
  PetiteReport p = petite_check(k, {0, 1}, std::nullopt, std::nullopt);
  CHECK(p.holds);
  CHECK(p.min_sum == Rational(1, 2));
  CHECK(p.max_entry == Rational(1, 2));
}
