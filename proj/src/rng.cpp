#include "energy/rng.hpp"

#include <array>

namespace energy {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t state = master_seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (stream * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

namespace {

Rng seeded(std::uint64_t seed) {
  // Fill the full Mersenne state through a seed sequence so that nearby
  // seeds do not produce correlated openings.
  std::uint64_t s = seed;
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(s);
    words[i] = static_cast<std::uint32_t>(v);
    words[i + 1] = static_cast<std::uint32_t>(v >> 32U);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

} // namespace

Rng child_rng(std::uint64_t master_seed, std::uint64_t stream) {
  return seeded(derive_seed(master_seed, stream));
}

Rng child_rng(std::uint64_t master_seed, std::uint64_t stream,
              std::uint64_t substream) {
  return seeded(derive_seed(derive_seed(master_seed, stream), substream));
}

} // namespace energy
