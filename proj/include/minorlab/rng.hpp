#pragma once

#include <array>
#include <cstdint>

namespace minorlab {

// Philox4x64-10 block function.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr,
                                        const std::array<std::uint64_t, 2>& key);

// Stream purposes; part of the counter so streams never overlap.
enum class StreamPurpose : std::uint64_t {
  Increments = 1,
  RandomTime = 2,
  Samples = 3,
  Polytope = 4,
  Fixture = 5,
};

// Reproducible sequence for (seed, purpose, index): key = (seed, purpose),
// counter = (block, index, 0, 0).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double next_uniform();
  double next_normal();
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int lane_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Mixes a seed with job coordinates (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace minorlab
