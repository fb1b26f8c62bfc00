#pragma once

#include <array>
#include <cstdint>

namespace tvd {

// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit
// key; (seed, a, b) triples map to keys through derive_key so that every
// (size, rep) pair of an experiment owns an independent substream.
class Philox {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  using result_type = std::uint32_t;

  explicit Philox(std::uint64_t key = 0);
  Philox(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

  // One block of the raw bijection; exposed for known-answer tests.
  static Counter block(Counter ctr, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }
  result_type operator()();

  // Uniform in (0, 1) with 53 random bits.
  double uniform();
  // Standard normal by the Box-Muller transform.
  double normal();

 private:
  Key key_{};
  Counter counter_{};
  Counter buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mixing of (seed, a, b) into a stream key.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace tvd
