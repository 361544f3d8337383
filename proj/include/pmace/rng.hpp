#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pmace {

/// Derives independent random substreams from one master seed.
///
/// Each (seed, label, index) triple maps to its own mt19937_64 stream, so
/// e.g. the scan-pattern jitter and the per-patch Poisson noise never share
/// state and changing one does not perturb the other.
std::mt19937_64 substream(uint64_t seed, std::string_view label, uint64_t index = 0);

/// splitmix64 finalizer; used to mix seed material.
uint64_t mix64(uint64_t x);

}  // namespace pmace
