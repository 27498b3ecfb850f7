#pragma once

// Counter-keyed random streams and the keyed hash used for lazy percolation.
//
// Every stochastic quantity in the library is drawn from a stream keyed by
// (seed, domain, index...) so results never depend on scheduling.

#include <cstdint>
#include <initializer_list>
#include <span>

#include "group.hpp"

namespace cosetwalk {

// SplitMix64 finalizer (Stafford variant 13); a bijection on 64-bit words.
inline constexpr std::uint64_t fmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Keyed hash of a byte string: 8-byte little-endian chunks (last one
// zero-padded) are folded through fmix64, then the length is mixed in.
// Incremental form, so callers can hash structured data without buffering.
class KeyedHasher {
 public:
  explicit KeyedHasher(std::uint64_t key) noexcept : h_(fmix64(key ^ kGolden)) {}

  void put_byte(std::uint8_t b) noexcept {
    chunk_ |= static_cast<std::uint64_t>(b) << (8 * fill_);
    ++length_;
    if (++fill_ == 8) flush();
  }

  void put_u64(std::uint64_t x) noexcept {
    for (int k = 0; k < 8; ++k) put_byte(static_cast<std::uint8_t>(x >> (8 * k)));
  }

  std::uint64_t finish() noexcept {
    if (fill_ > 0) flush();
    return fmix64(h_ ^ length_);
  }

 private:
  void flush() noexcept {
    h_ = fmix64(h_ ^ chunk_) + kGolden;
    chunk_ = 0;
    fill_ = 0;
  }

  std::uint64_t h_;
  std::uint64_t chunk_ = 0;
  std::uint64_t length_ = 0;
  int fill_ = 0;
};

inline std::uint64_t keyed_hash64(std::uint64_t key, std::span<const std::uint8_t> bytes) noexcept {
  KeyedHasher h(key);
  for (std::uint8_t b : bytes) h.put_byte(b);
  return h.finish();
}

// Combines a seed with a list of stream coordinates.
inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = fmix64(seed + kGolden);
  for (std::uint64_t c : coords) h = fmix64(h ^ fmix64(c + kGolden));
  return h;
}

// Maps a 64-bit value to [0, 1) using its top 53 bits.
inline constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// SplitMix64 generator. Small state makes one stream per walk affordable.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t key) noexcept : state_(key) {}
  StreamRng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept
      : state_(stream_key(seed, coords)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += kGolden;
    return fmix64(state_);
  }

  // Uniform integer in [0, n) by multiply-shift.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  double uniform() noexcept { return to_unit((*this)()); }

 private:
  std::uint64_t state_;
};

// Draws letters of the uniform step measure, two bits at a time.
class LetterSource {
 public:
  explicit LetterSource(StreamRng rng) noexcept : rng_(rng) {}

  Letter next() noexcept {
    if (left_ == 0) {
      bits_ = rng_();
      left_ = 32;
    }
    auto l = static_cast<Letter>(bits_ & 3U);
    bits_ >>= 2;
    --left_;
    return l;
  }

 private:
  StreamRng rng_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

}  // namespace cosetwalk
