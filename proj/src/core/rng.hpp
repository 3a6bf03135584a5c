#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "core/constants.hpp"

namespace ewsim {

/// Philox-4x32-10 counter-based block cipher. Streams are addressed by
/// (seed, stream id, channel); draws within a stream advance a 32-bit block
/// counter. This keeps per-atom randomness reproducible and independent of
/// evaluation order or thread count.
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
      const std::array<uint32_t, 4> next = {
          static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
          static_cast<uint32_t>(p1),
          static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
          static_cast<uint32_t>(p0)};
      ctr = next;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Channel labels for the independent random streams of one simulated atom
/// (or one rendered frame).
enum class RngChannel : uint32_t {
  InitialPosition = 0,
  InitialVelocity = 1,
  Recoil = 2,
  Emission = 3,
  FrameNoise = 4,
};

class CounterRng {
public:
  CounterRng(uint64_t seed, uint64_t stream, RngChannel channel)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        base_{static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32),
              static_cast<uint32_t>(channel), 0} {}

  uint32_t next_u32() {
    if (have_ == 0) {
      buf_ = Philox4x32::block(base_, key_);
      ++base_[3];
      have_ = 4;
    }
    return buf_[--have_];
  }

  /// Uniform double in (0, 1).
  double uniform() {
    const uint64_t hi = next_u32();
    const uint64_t lo = next_u32();
    const uint64_t bits = (hi << 21) ^ (lo >> 11);  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = constants::two_pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Unit vector uniform on the sphere.
  std::array<double, 3> isotropic_direction() {
    const double cz = 2.0 * uniform() - 1.0;
    const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    const double phi = constants::two_pi * uniform();
    return {sz * std::cos(phi), sz * std::sin(phi), cz};
  }

  /// Poisson sample. Knuth's product method for small means, normal
  /// approximation above 80 (counts there are far beyond anything the
  /// physics produces per bounce).
  long poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean < 80.0) {
      const double limit = std::exp(-mean);
      long k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > limit);
      return k - 1;
    }
    const double v = mean + std::sqrt(mean) * normal();
    return v < 0 ? 0 : static_cast<long>(std::llround(v));
  }

private:
  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> base_;
  std::array<uint32_t, 4> buf_{};
  int have_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace ewsim
