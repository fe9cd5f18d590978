#include "cohort/rng.hpp"

#include <cmath>
#include <numbers>

namespace cohort {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // One SplitMix64 finalization round over the combined words.
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double SplitMix64::next_gaussian() {
  // Box-Muller; guard against log(0).
  double u1 = next_double();
  while (u1 <= 0.0) u1 = next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  return mix(root, fnv1a64(tag));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a) {
  return mix(derive_seed(root, tag), a);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a, std::string_view b) {
  return mix(derive_seed(root, tag, a), fnv1a64(b));
}

}  // namespace cohort
