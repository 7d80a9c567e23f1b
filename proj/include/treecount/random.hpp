#pragma once

#include <cstdint>
#include <random>

namespace treecount {

/// Generator used throughout; every randomized routine takes one by reference.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used as a counter-based seed splitter.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the `stream`-th independent substream of `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Streams ±1 signs, 64 per generator draw.
class RademacherStream {
 public:
  explicit RademacherStream(Rng& rng) : rng_(rng) {}

  double next() {
    if (left_ == 0) {
      bits_ = rng_();
      left_ = 64;
    }
    const double s = (bits_ & 1U) ? 1.0 : -1.0;
    bits_ >>= 1;
    --left_;
    return s;
  }

 private:
  Rng& rng_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

}  // namespace treecount
