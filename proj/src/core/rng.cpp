#include "core/rng.hpp"

#include <cmath>

namespace grasplab {

uint64_t hash_u64(uint64_t seed, uint64_t value) {
  uint64_t state = seed ^ (0x9e3779b97f4a7c15ull + value);
  uint64_t a = splitmix64_next(state);
  state ^= value * 0xd1342543de82ef95ull;
  return a ^ splitmix64_next(state);
}

uint64_t hash_str(uint64_t seed, std::string_view s) {
  // FNV-1a folded into the seeded mixer.
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return hash_u64(seed, h);
}

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

RngStream::RngStream(uint64_t seed) { seed_state(seed); }

RngStream::RngStream(uint64_t seed, std::string_view label, uint64_t index) {
  seed_state(hash_u64(hash_str(seed, label), index));
}

void RngStream::seed_state(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64_next(sm);
}

uint64_t RngStream::next_u64() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

int64_t RngStream::uniform_int(int64_t lo, int64_t hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  // Rejection to avoid modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return lo + static_cast<int64_t>(v % span);
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 in (0,1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

double RngStream::normal(double mean, double sigma) {
  return mean + sigma * normal();
}

double RngStream::truncated_normal(double sigma, double limit) {
  for (;;) {
    double v = sigma * normal();
    if (std::abs(v) <= limit) return v;
  }
}

}  // namespace grasplab
