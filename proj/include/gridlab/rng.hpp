#pragma once

#include <cstdint>

namespace gridlab {

// Counter-based stream RNG. A draw is a hash of (seed, stream_id, counter),
// so streams never share state and any draw sequence can be replayed from
// the three fields alone. Distinct stream_ids under the same seed give
// unrelated sequences; that is what lets actors, samplers and weight init
// run concurrently without coordination.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  double next_double();                 // uniform [0, 1)
  float next_float();                   // uniform [0, 1)
  std::uint32_t next_below(std::uint32_t n);  // uniform [0, n), unbiased
  double next_gaussian();               // standard normal (Box-Muller)
  bool next_bool(double p_true = 0.5);

  // Independent child stream; deterministic in (this stream, child_id).
  RngStream split(std::uint64_t child_id) const;
};

RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_id);

// Registry of well-known stream ids so modules never collide.
namespace streams {
inline constexpr std::uint64_t kSplitBuild = 1;
inline constexpr std::uint64_t kEpisodeSampling = 2;
inline constexpr std::uint64_t kWeightInit = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kEnvService = 5;
inline constexpr std::uint64_t kGradCheck = 6;
inline constexpr std::uint64_t kClassifierData = 7;
inline constexpr std::uint64_t kActorBase = 100;  // actor i uses kActorBase + i
}  // namespace streams

}  // namespace gridlab
