#pragma once

// Named random substreams. Every consumer derives its engine from the run
// seed plus a stable name (and optionally an index), so adding or removing
// draws in one consumer never shifts the values seen by another.

#include <cstdint>
#include <random>
#include <string_view>

namespace airfedga {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a64(name)) + index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return Engine(substream_seed(seed, name, index));
}

}  // namespace airfedga
