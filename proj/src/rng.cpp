#include "pmace/rng.hpp"

namespace pmace {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 substream(uint64_t seed, std::string_view label, uint64_t index) {
  uint64_t h = mix64(seed);
  for (char c : label) h = mix64(h ^ static_cast<uint64_t>(static_cast<unsigned char>(c)));
  h = mix64(h ^ index);
  return std::mt19937_64(h);
}

}  // namespace pmace
