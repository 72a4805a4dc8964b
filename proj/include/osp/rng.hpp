#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Deterministic random primitives. std::uniform_int_distribution,
// std::uniform_real_distribution and std::shuffle are implementation
// defined, so every draw that feeds a documented result goes through
// the helpers below instead.
namespace osp::rng {

// splitmix64 finalizer.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
  return mix(base + 0x632be59bd9b4e019ULL * (stream + 1));
}

// Uniform double in [0, 1) built from the top 53 bits.
inline double canonical(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n), n >= 1, by rejection sampling.
inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = gen();
    if (x >= rem) return (x - rem) % n;
  }
}

// Fisher-Yates shuffle driven by below().
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[below(gen, i)]);
  }
}

}  // namespace osp::rng
