#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bcusum {

// Counter-based generator (Philox2x64, 10 rounds). Output for a given
// (key, counter) pair is a pure function, so a replication indexed by
// (seed, rep) produces the same deviates no matter which worker runs it.
struct Philox2x64 {
  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

  static std::array<std::uint64_t, 2> block(std::uint64_t key,
                                            std::uint64_t c0,
                                            std::uint64_t c1) {
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(kMul) * c0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      c0 = hi ^ key ^ c1;
      c1 = lo;
      key += kWeyl;
    }
    return {c0, c1};
  }
};

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

// Independent seed for a named sub-experiment (e.g. the null calibration
// runs inside a size-adjusted power study).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t id) {
  return mix64(seed ^ mix64(id + 0x517CC1B727220A95ULL));
}

// Stream of N(0,1) deviates for one Monte Carlo replication.
// Deviates depend only on (seed, rep) and the position in the stream.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t rep)
      : key_(mix64(seed) ^ 0x6A09E667F3BCC909ULL), rep_(rep) {}

  double next() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const auto r = Philox2x64::block(key_, rep_, ctr_++);
    // map to (0,1]; u1 must stay away from 0 for the log below
    const double u1 = (static_cast<double>(r[0] >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(r[1] >> 11) * 0x1.0p-53;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    cached_ = rad * std::sin(ang);
    has_cached_ = true;
    return rad * std::cos(ang);
  }

 private:
  std::uint64_t key_;
  std::uint64_t rep_;
  std::uint64_t ctr_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace bcusum
