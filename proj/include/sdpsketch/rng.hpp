#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace sdpsketch {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `stream` under `seed`; a pure function of both.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Stable tag for named substreams ("instance", "sketch", ...).
constexpr std::uint64_t stream_tag(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based 64-bit generator (SplitMix64). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(std::uint64_t seed) : state_(seed) {}
  StreamEngine(std::uint64_t seed, std::uint64_t stream) : state_(substream_seed(seed, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace sdpsketch
