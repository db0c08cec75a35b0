#pragma once

// Counter-based random numbers.
//
// Every draw is a pure function of (seed, replica, counter):
//
//   key    = mix(seed ^ mix(replica + 0x632be59bd9b4e019))
//   u64(c) = mix(key + (c + 1) * 0x9e3779b97f4a7c15)
//
// where mix is the SplitMix64 finalizer. A replica's stream therefore never
// depends on which thread runs it or on how many replicas run before it, and
// serial and parallel drivers produce the same bits. Normals use Box-Muller on
// consecutive counters (both outputs are consumed, in order).

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hyperbary {

inline constexpr std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t replica)
      : key_(splitmix_mix(seed ^ splitmix_mix(replica + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  /// Raw draw at an absolute counter position; does not advance the stream.
  std::uint64_t at(std::uint64_t c) const { return splitmix_mix(key_ + (c + 1) * 0x9e3779b97f4a7c15ULL); }

  std::uint64_t next_u64() { return at(counter_++); }

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hyperbary
