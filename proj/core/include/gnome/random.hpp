#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace gnome {

// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so seeded splits and samples use these helpers to stay identical across
// standard libraries. std::mt19937_64's output sequence is fixed by the standard.

// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Fisher-Yates, front to back: after the call the first `prefix` elements are a
// uniform sample without replacement, in random order.
template <typename T>
void partial_shuffle(std::span<T> items, std::size_t prefix, std::mt19937_64& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < prefix && i + 1 < n; ++i) {
    auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    using std::swap;
    swap(items[i], items[j]);
  }
}

template <typename T>
void shuffle(std::span<T> items, std::mt19937_64& rng) {
  partial_shuffle(items, items.size(), rng);
}

// SplitMix64 finalizer, used to derive independent per-request seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace gnome
