#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace ngalerkin {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: output n is a hash of (key, n). Streams for
/// different (key, index) pairs are independent, so per-particle streams can
/// be drawn in any thread order without changing results. Satisfies
/// UniformRandomBitGenerator for use with <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr Stream() = default;
  constexpr explicit Stream(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Independent child stream for index i.
  constexpr Stream split(std::uint64_t i) const { return Stream(splitmix64(key_ + splitmix64(~i))); }
  Stream split(std::string_view name) const;

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

  friend constexpr bool operator==(const Stream&, const Stream&) = default;

 private:
  std::uint64_t key_ = 0x853c49e6748fea9bULL;
  std::uint64_t counter_ = 0;
};

inline Stream Stream::split(std::string_view name) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return split(h);
}

}  // namespace ngalerkin
