#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fairpost {

// SplitMix64 finalizer; the mixing step behind every stream below.
constexpr std::uint64_t Mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child stream id from a parent id and a tag. Used to name
// sub-streams ("split", "training", "sampling") and to key them by
// (round, client) so results do not depend on evaluation order.
std::uint64_t DeriveStream(std::uint64_t parent, std::string_view tag);
std::uint64_t DeriveStream(std::uint64_t parent, std::uint64_t index);

// Counter-based uniform stream: the variate at (seed, stream, index) is a
// pure function of those three numbers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t Bits(std::uint64_t index) const noexcept {
    return Mix64(Mix64(seed_ ^ Mix64(stream_)) + index);
  }

  // Uniform in the open interval (0, 1).
  double Uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(Bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// Sequential generator over an RngStream, for shuffles and initializers.
// Distributions are implemented here instead of <random> so sequences are
// identical across standard library implementations.
class SequentialRng {
 public:
  explicit SequentialRng(RngStream stream) noexcept : stream_(stream) {}
  SequentialRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : stream_(seed, stream) {}

  std::uint64_t NextBits() noexcept { return stream_.Bits(counter_++); }
  double NextUniform() noexcept { return stream_.Uniform(counter_++); }
  double NextUniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * NextUniform();
  }
  double NextGaussian() noexcept;
  // Uniform integer in [0, bound).
  std::size_t NextIndex(std::size_t bound) noexcept;

  template <typename T>
  void Shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = NextIndex(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  RngStream stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace fairpost
