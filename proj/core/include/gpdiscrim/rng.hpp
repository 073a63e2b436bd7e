#ifndef GPDISCRIM_RNG_HPP
#define GPDISCRIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace gpdiscrim {

// Counter-based generator: output i of a stream is fmix64(key + i*GAMMA), the
// SplitMix64 sequence evaluated at an explicit counter. Being a pure function
// of (key, counter) makes replicate streams reproducible regardless of the
// order in which they are consumed.
//
// Stream splitting: substream j of a generator with key k has key
// fmix64(k ^ fmix64(j + GAMMA)), so (seed, replicate-index) pairs map to
// decorrelated streams without any shared state.
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(fmix64(seed + kGamma)) {}

  // Substream derivation; see class comment.
  CounterRng split(std::uint64_t index) const {
    CounterRng out(*this);
    out.key_ = fmix64(key_ ^ fmix64(index + kGamma));
    out.counter_ = 0;
    out.have_cached_normal_ = false;
    return out;
  }

  std::uint64_t operator()() { return fmix64(key_ + (++counter_) * kGamma); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller on (0,1] uniforms; pair cached.
  // Hand-rolled so that streams are identical across standard libraries.
  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 =
        (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t fmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace gpdiscrim

#endif
