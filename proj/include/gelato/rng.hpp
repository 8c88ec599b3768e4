#pragma once

#include <cstdint>
#include <limits>

namespace gelato {

/// Named random streams. Every draw is addressed by (stream, step, token), so
/// two consumers that ask for the same address see the same numbers no matter
/// what else they drew before.
enum class Stream : std::uint64_t {
  channel = 0x6368616e6e656cULL,
  entropy = 0x656e74726f7079ULL,
  accept = 0x616363657074ULL,
};

std::uint64_t mix64(std::uint64_t x);

/// Deterministic child seed, e.g. one per Monte-Carlo round.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit CounterEngine(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Uniform variate in [0, 1) with 53 random bits.
double uniform01(CounterEngine& engine);

class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  CounterEngine engine(Stream stream, std::uint64_t step,
                       std::uint64_t token = 0) const;

 private:
  std::uint64_t seed_;
};

}  // namespace gelato
