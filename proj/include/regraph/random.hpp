#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace regraph {

// Counter-based SplitMix64 stream.
//
// A stream is a 64-bit key plus a draw counter; draw i returns
// splitmix64_mix(key + (i + 1) * 0x9e3779b97f4a7c15). Child streams are
// derived from the key alone (never from the counter), so
// `derive(a, b)` names the same sub-stream no matter how many values the
// parent has produced. Every operation is plain 64-bit integer arithmetic,
// which makes replays bit-identical across compilers and platforms.
//
// Sub-stream conventions used by the library:
//   topology join draw      derive(event_index, layer_index)
//   rfa tie-break           derive(kTieTag, peer)
//   rfa label completion    derive(kLabelTag, peer)
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  RandomSource derive(std::uint64_t tag) const {
    RandomSource child{};
    child.key_ = mix(key_ ^ mix(tag + kDeriveSalt));
    return child;
  }

  template <class... Tags>
  RandomSource derive(std::uint64_t first, std::uint64_t second, Tags... rest) const {
    return derive(first).derive(second, rest...);
  }

  // Fisher-Yates using `below`; std::shuffle's draw pattern is unspecified.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const { return key_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  RandomSource() = default;

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x5eed5eed5eed5eedULL;
  static constexpr std::uint64_t kDeriveSalt = 0x6a09e667f3bcc909ULL;

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t RandomSource::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Reject the short final block so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace regraph
