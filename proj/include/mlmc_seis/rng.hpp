#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace mlmcseis {

// Identifies one random draw: (run namespace, level, sample index).
struct SampleKey {
  std::uint64_t run = 0;
  int level = 0;
  std::uint64_t index = 0;

  // Single 64-bit digest of the key, stored in pool records as `seed`.
  std::uint64_t digest() const;
  friend bool operator==(const SampleKey&, const SampleKey&) = default;
};

// Mixes a string into a run namespace id (e.g. "tol3/mlmc").
std::uint64_t run_id(std::uint64_t base_seed, const std::string& tag);

// Counter-based stream: output k is splitmix64(key + k * golden).  Any
// (key, k) pair can be evaluated independently of the others, which is what
// makes coupled coarse/fine draws and restarts exact.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  explicit KeyedStream(std::uint64_t key) : key_(key) {}
  explicit KeyedStream(const SampleKey& key) : key_(key.digest()) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller, no caching so the stream stays counter-addressable).
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mlmcseis
