#include "gridlab/rng.hpp"

#include <cmath>

namespace gridlab {
namespace {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t RngStream::next_u64() {
  std::uint64_t key = mix64(seed + kGolden) ^ mix64(stream_id * 0xda942042e4dd58b5ULL + 1);
  return mix64(key ^ (counter++ * kGolden + 0x2545f4914f6cdd1dULL));
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float RngStream::next_float() {
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

std::uint32_t RngStream::next_below(std::uint32_t n) {
  // 53-bit rejection keeps the draw unbiased for any n
  std::uint64_t x, r;
  do {
    x = next_u64() >> 11;
    r = x % n;
  } while (x - r > (std::uint64_t(1) << 53) - n);
  return static_cast<std::uint32_t>(r);
}

double RngStream::next_gaussian() {
  // two fresh uniforms per call; no cached spare, so draw counts stay simple
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool RngStream::next_bool(double p_true) { return next_double() < p_true; }

RngStream RngStream::split(std::uint64_t child_id) const {
  RngStream child;
  child.seed = seed;
  child.stream_id = mix64(stream_id * 0x9fb21c651e98df25ULL + child_id + 1);
  child.counter = 0;
  return child;
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream{seed, stream_id, 0};
}

}  // namespace gridlab
