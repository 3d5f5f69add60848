#pragma once

#include <cstdint>
#include <random>

namespace energy {

/// The one generator used throughout the library: 64-bit Mersenne Twister.
/// Every stochastic routine takes an explicit `Rng&`; there is no global
/// generator.
using Rng = std::mt19937_64;

/// One step of SplitMix64; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for stream `stream` under `master_seed`. Streams derived from the
/// same master are decorrelated through SplitMix64 and do not depend on
/// the order in which they are requested.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

/// Generator for stream `stream`, seeded via `derive_seed`.
Rng child_rng(std::uint64_t master_seed, std::uint64_t stream);

/// Two-level key split, e.g. (cell, replicate).
Rng child_rng(std::uint64_t master_seed, std::uint64_t stream,
              std::uint64_t substream);

} // namespace energy
