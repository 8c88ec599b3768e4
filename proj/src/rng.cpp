#include "gelato/rng.hpp"

namespace gelato {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x726f756e64ULL) + index);
}

double uniform01(CounterEngine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

CounterEngine RngStreams::engine(Stream stream, std::uint64_t step,
                                 std::uint64_t token) const {
  std::uint64_t key = mix64(seed_ ^ static_cast<std::uint64_t>(stream));
  key = mix64(key + step);
  key = mix64(key ^ (token * 0xd1b54a32d192ed03ULL));
  return CounterEngine(key);
}

}  // namespace gelato
