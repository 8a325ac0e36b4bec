#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ckqr {

inline std::uint64_t
splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Key for the stream of replicate `index` under `seed`.
inline std::uint64_t
stream_key(std::uint64_t seed, std::uint64_t index)
{
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

//! Random stream addressed by (seed, index). Variates are produced by explicit
//! transforms of the 64-bit engine output, so a stream yields the same numbers
//! on every platform and regardless of which thread consumes it.
class Rng
{
public:
  Rng(std::uint64_t seed, std::uint64_t index)
    : engine_(stream_key(seed, index))
  {}

  //! Uniform on the open interval (0, 1).
  double uniform()
  {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal()
  {
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

  double exponential() { return -std::log(uniform()); }

  //! Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n)
  {
    const std::uint64_t limit = ~std::uint64_t{ 0 } - (~std::uint64_t{ 0 } % n);
    std::uint64_t v = engine_();
    while (v >= limit) {
      v = engine_();
    }
    return v % n;
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace ckqr
