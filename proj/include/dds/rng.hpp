#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dds {

// All randomness in a run flows from one master seed through named
// sub-streams, so adding a consumer never perturbs unrelated draws.
inline uint64_t derive_seed(uint64_t master, std::string_view stream) {
  uint64_t h = 1469598103934665603ull;  // FNV-1a over the stream name
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  h ^= master + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;  // splitmix64 finalizer
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view stream,
                                uint64_t index) {
  return std::mt19937_64(derive_seed(derive_seed(master, stream), "#") + index);
}

}  // namespace dds
