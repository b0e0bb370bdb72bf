#include <doctest.h>

#include <cmath>
#include <set>

#include "minorlab/rng.hpp"

using namespace minorlab;

// Known answers cross-checked against numpy.random.Philox (tests/oracles/philox_kat.py).
TEST_CASE("philox4x64-10 known answers") {
  using A4 = std::array<std::uint64_t, 4>;
  CHECK(philox4x64({0, 0, 0, 0}, {0, 0}) ==
        A4{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  CHECK(philox4x64({1, 5, 0, 0}, {42, 1}) ==
        A4{0x47c0025c7edc86afULL, 0x47c781bd479c6168ULL, 0xe920df9d3fceaf6dULL, 0x6a69b9e83efd07dbULL});
  CHECK(philox4x64({7, 3, 0, 0}, {0xDEADBEEFULL, 3}) ==
        A4{0x3f143ffbdf5012f7ULL, 0x241c08bf75efb7cfULL, 0xd5aff4b07f6e5bd8ULL, 0x8c3de4669687a6f8ULL});
}

TEST_CASE("counter stream draws are frozen") {
  CounterStream u(42, StreamPurpose::Increments, 5);
  CHECK(u.next_uniform() == 0.54578608644301996);
  CHECK(u.next_uniform() == 0.43614966827741047);
  CHECK(u.next_uniform() == 0.42685403378404957);
  CounterStream n(42, StreamPurpose::Increments, 5);
  CHECK(n.next_normal() == -1.0131013620441158);
  CHECK(n.next_normal() == 0.42974638611125415);
}

TEST_CASE("derive_seed is frozen") {
  CHECK(derive_seed(1, 0x5eed, 0) == 0x807b8667329cf885ULL);
  CHECK(derive_seed(7, 0x5747, 3) == 0xb532c0fc0db4dae9ULL);
}

TEST_CASE("streams for different purposes and indices differ") {
  std::set<std::uint64_t> first;
  for (auto p : {StreamPurpose::Increments, StreamPurpose::RandomTime, StreamPurpose::Samples,
                 StreamPurpose::Polytope, StreamPurpose::Fixture})
    for (std::uint64_t i = 0; i < 4; ++i) first.insert(CounterStream(9, p, i).next_u64());
  CHECK(first.size() == 20);
}

TEST_CASE("uniform and normal moments") {
  CounterStream s(3, StreamPurpose::Samples, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.next_uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
  }
  for (int i = 0; i < n; ++i) {
    const double z = s.next_normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("next_below stays in range and hits every value") {
  CounterStream s(4, StreamPurpose::Fixture, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = s.next_below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}
