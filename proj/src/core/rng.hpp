#pragma once

#include <cstdint>
#include <string_view>

namespace grasplab {

// Stateless mixer used for seeding and for hashing small keys.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t hash_u64(uint64_t seed, uint64_t value);
uint64_t hash_str(uint64_t seed, std::string_view s);

// Deterministic random stream (xoshiro256++). Every distribution is
// implemented here rather than taken from <random>, so sequences are
// identical across standard libraries and platforms.
class RngStream {
 public:
  explicit RngStream(uint64_t seed);
  // Derived substream: independent stream keyed by (seed, label, index).
  RngStream(uint64_t seed, std::string_view label, uint64_t index = 0);

  uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive bounds
  double normal();                         // standard normal
  double normal(double mean, double sigma);
  // Zero-mean normal resampled until |x| <= limit.
  double truncated_normal(double sigma, double limit);

 private:
  void seed_state(uint64_t seed);
  uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace grasplab
