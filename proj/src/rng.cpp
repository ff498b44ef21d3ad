#include "nne/rng.hpp"

#include <cmath>
#include <numbers>

namespace nne {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t key = mix64(seed);
  for (std::uint64_t idx : path) key = mix64(key ^ mix64(idx + 0x632be59bd9b4e019ULL));
  return key;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : seed_(master_seed), path_(std::move(path)), engine_(derive_key(seed_, path_)) {}

RngStream RngStream::substream(std::uint64_t index) const {
  std::vector<std::uint64_t> child = path_;
  child.push_back(index);
  return RngStream(seed_, std::move(child));
}

std::string RngStream::path_string() const {
  std::string s = std::to_string(seed_);
  for (std::uint64_t idx : path_) {
    s += '/';
    s += std::to_string(idx);
  }
  return s;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::size_t RngStream::categorical(std::span<const double> probs) {
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.empty() ? 0 : probs.size() - 1;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace nne
