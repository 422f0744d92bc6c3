#pragma once

#include <cmath>
#include <cstdint>

namespace hmn {

// Counter-style pseudo random generator built on the splitmix64 scrambler.
// Every discrete draw is derived from fixed-width integer arithmetic so that
// generated structures are identical across platforms and compilers.
// `stream(seed, index)` gives statistically independent streams for the same
// seed, which keeps sample sets reproducible no matter how draws are
// scheduled.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(scramble(seed)) {}

  static Rng stream(uint64_t seed, uint64_t index) {
    Rng r(0);
    r.state_ = scramble(seed ^ scramble(index + 0x632be59bd9b4e019ULL));
    return r;
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble(state_);
  }

  // [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1); never returns exactly zero.
  double uniform_open() {
    double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1. Fixed-point multiply keeps the
  // mapping platform independent (bias is ~n/2^64, irrelevant here).
  uint32_t uniform_int(uint32_t n) {
    return static_cast<uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller (no cached spare, so the draw count per
  // call is fixed).
  double normal() {
    double u1 = uniform_open();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static uint64_t scramble(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace hmn
