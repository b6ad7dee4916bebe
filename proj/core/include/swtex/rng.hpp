#pragma once

#include <cstdint>
#include <random>

namespace swtex {

using Rng = std::mt19937_64;

/// Named sub-streams of a master seed. Every random decision in a run flows
/// from one master seed through one of these.
enum class Stream : std::uint64_t {
  kNoise = 1,
  kDirections = 2,
  kCrops = 3,
  kGroundTruthCrops = 4,
  kWeights = 5,
};

/// Independent generator for (master seed, stream, index).
Rng make_rng(std::uint64_t master_seed, Stream stream, std::uint64_t index = 0);

/// SplitMix64 finalizer, exposed for seed derivation in tests and tools.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace swtex
