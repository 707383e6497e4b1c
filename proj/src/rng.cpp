#include "nvlab/rng.hpp"

namespace nvlab {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t shot, Stream stream)
    : key_(mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) + mix64(shot * 0xD1B54A32D192ED03ULL) +
                 static_cast<std::uint64_t>(stream) * 0x8CB92BA72F3D8DD7ULL)) {}

}  // namespace nvlab
