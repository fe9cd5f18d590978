#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cohort {

// 64-bit FNV-1a. Used wherever a stable, platform-independent hash of bytes
// is needed (seed derivation, bag-of-words bucketing, cache keys). Do not
// replace with std::hash: its values are implementation-defined and results
// written to disk would stop being reproducible across toolchains.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// SplitMix64: tiny, fast, and fully specified by its seed, so streams are
// identical on every platform (std::mt19937 would be too, but the library
// keeps one engine everywhere and std::shuffle/std::*_distribution are not
// portable across standard libraries).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of precision.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n) without modulo bias. n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection sampling on the top of the range.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  // Standard normal via Box-Muller (one value per call; simple and portable).
  double next_gaussian();

 private:
  std::uint64_t state_;
};

// Hierarchical seed derivation: children of a root seed are decorrelated
// streams identified by a string tag and optional numeric components.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a, std::string_view b);

// In-place Fisher-Yates with our own engine (see SplitMix64 note above).
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace cohort
