#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nvt {

// splitmix64: cheap, well-mixed 64-bit permutation.  Used both as a stream
// derivation function for seeding and as the mixer behind derive_seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic per-(stream, counter) seed derived from a master seed, so
// that parallel workers never share RNG state and runs stay reproducible
// regardless of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t counter) {
  return splitmix64(splitmix64(master ^ 0x6a09e667f3bcc909ull) +
                    splitmix64(stream) + 0x9e3779b97f4a7c15ull * counter);
}

// FNV-1a over bytes; used to fingerprint resolved configurations.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_double_17(double x);
std::string hex64(std::uint64_t x);

}  // namespace nvt
