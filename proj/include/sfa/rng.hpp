#pragma once

#include <cstdint>
#include <vector>

namespace sfa {

// splitmix64: the output is a pure mix of seed + step counter, so streams
// are reproducible across platforms and implementations. This is the only
// generator used for sampling; config names it explicitly ("splitmix64").
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by modulo reduction. The tiny modulo bias is
  // irrelevant at pool sizes of a few thousand and keeps the draw sequence
  // trivially reproducible from the documented definition.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// k distinct indices from [0, n), uniform without replacement, in draw
// order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    SplitMix64& rng);

// In-place Fisher-Yates over an index vector.
void shuffle_indices(std::vector<std::size_t>& indices, SplitMix64& rng);

}  // namespace sfa
