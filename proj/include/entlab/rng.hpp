#pragma once

#include <cstdint>
#include <vector>

namespace entlab {

// Counter-based deterministic generator (SplitMix64 evaluated at a counter).
//
// Output k of a stream with state word s is
//   mix64(s + (k+1) * 0x9E3779B97F4A7C15)
// where mix64 is the SplitMix64 finalizer. Sub-streams are derived as
//   s' = mix64(s ^ mix64(stream_id + 0x1F123BB5159A55E5)),
// so (seed, stream_id, counter) fully determines every draw. Results are
// independent of any block decomposition used for parallelism.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Independent sub-stream; used per Monte Carlo path.
  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return CounterRng(mix64(seed ^ mix64(stream_id + 0x1F123BB5159A55E5ULL)));
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(state_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Index i with probability weights[i] / sum(weights). Weights need not be
  // normalized; they must be nonnegative with a positive sum.
  int pick(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

}  // namespace entlab
