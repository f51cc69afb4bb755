#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace netslice {

using Rng = std::mt19937_64;

/// Builds an independent generator from a root seed and a list of stream
/// labels (user index, phase tag, ...). Same inputs always give the same stream.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> labels = {}) {
  std::seed_seq::result_type words[16];
  std::size_t n = 0;
  words[n++] = static_cast<std::uint32_t>(seed);
  words[n++] = static_cast<std::uint32_t>(seed >> 32);
  for (std::uint64_t label : labels) {
    if (n + 2 > 16) break;
    words[n++] = static_cast<std::uint32_t>(label);
    words[n++] = static_cast<std::uint32_t>(label >> 32);
  }
  std::seed_seq seq(words, words + n);
  return Rng(seq);
}

/// Uniform draw in [0, 1) built from the top 53 bits; independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace netslice
