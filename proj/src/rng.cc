#include "fairpost/rng.h"

#include <cmath>
#include <numbers>

namespace fairpost {

std::uint64_t DeriveStream(std::uint64_t parent, std::string_view tag) {
  // FNV-1a over the tag, folded into the parent.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return Mix64(parent ^ Mix64(h));
}

std::uint64_t DeriveStream(std::uint64_t parent, std::uint64_t index) {
  return Mix64(parent + Mix64(index + 0x632be59bd9b4e019ULL));
}

double SequentialRng::NextGaussian() noexcept {
  const double u1 = NextUniform();
  const double u2 = NextUniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SequentialRng::NextIndex(std::size_t bound) noexcept {
  // Lemire's multiply-shift; the bias is below 2^-40 for our sizes.
  const unsigned __int128 product =
      static_cast<unsigned __int128>(NextBits()) * bound;
  return static_cast<std::size_t>(product >> 64);
}

}  // namespace fairpost
