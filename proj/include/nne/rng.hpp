#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nne {

/// Reproducible random stream identified by a master seed and a path of
/// stream indices. Two streams with the same (seed, path) produce the same
/// draws no matter which thread uses them or in which order they are built.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard; uniform and normal variates are derived here rather than through
/// <random> distributions, which are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

  /// Child stream at `path + [index]`. Does not advance this stream.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  /// "seed/a/b/c", the regeneration key written next to every result row.
  std::string path_string() const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller, pairs cached).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index k drawn with probability probs[k]; probs must sum to one.
  std::size_t categorical(std::span<const double> probs);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finalizer; used to derive stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace nne
