#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace love {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random source. Every sample in the project is drawn through
// this class: mt19937_64 is fully specified by the standard, and the uniform
// and normal transforms below avoid the implementation-defined
// std::*_distribution adapters, so a (seed, call sequence) pair always yields
// the same numbers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), gen_(splitmix64(seed)) {}

  // Independent stream derived from this rng's seed. Streams with different
  // ids never share state.
  Rng spawn(std::uint64_t stream_id) const {
    return Rng(splitmix64(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1))));
  }

  std::uint64_t seed() const { return seed_; }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection-free modulo would be biased for huge n; n here is always
    // small (buffer sizes, grid sizes), so use rejection sampling.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Marsaglia's polar method (no trig, deterministic).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Normal truncated to two standard deviations, as used by the
  // variance-scaling initializer.
  double truncated_normal() {
    double z = normal();
    while (std::abs(z) > 2.0) z = normal();
    return z;
  }

  std::uint64_t raw() { return gen_(); }

  // Text round-trip of the full generator state (mt19937_64 streams exactly).
  std::string serialize() const {
    std::ostringstream os;
    os << seed_ << ' ' << has_cached_ << ' ';
    os.precision(17);
    os << cached_ << ' ' << gen_;
    return os.str();
  }

  static Rng deserialize(const std::string& text) {
    std::istringstream is(text);
    Rng r;
    is >> r.seed_ >> r.has_cached_ >> r.cached_ >> r.gen_;
    return r;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace love
