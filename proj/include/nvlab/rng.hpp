#pragma once

#include <cstdint>
#include <limits>

namespace nvlab {

// Independent random sub-streams of a single shot. Keeping them apart lets two
// programs with the same delay structure see identical magnetic noise even
// when their pulse counts differ.
enum class Stream : std::uint64_t { static_offset = 1, ou = 2, pulse = 3, photons = 4, synthetic = 5 };

std::uint64_t mix64(std::uint64_t z);

// Counter-based generator: the n-th output is a pure function of
// (key, n), so a stream can be reconstructed from (seed, shot, stream)
// alone, independent of execution order. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t shot, Stream stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nvlab
