#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace oconnell {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Independent stream addressed by (seed, purpose, stream index); block i
// of the stream is philox(counter = {i_lo, i_hi, s_lo, s_hi}, key = seed).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t purpose, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_((static_cast<std::uint64_t>(purpose) << 48) ^ stream) {}

  PhiloxCounter block(std::uint64_t index) const {
    return philox4x32({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                       static_cast<std::uint32_t>(stream_),
                       static_cast<std::uint32_t>(stream_ >> 32)},
                      key_);
  }

  // Two uniforms in (0, 1) with 53 random bits each.
  std::array<double, 2> uniform_pair(std::uint64_t index) const {
    auto b = block(index);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
  }

  // Two standard normals by Box-Muller.
  std::array<double, 2> normal_pair(std::uint64_t index) const {
    auto u = uniform_pair(index);
    double r = std::sqrt(-2.0 * std::log(u[0]));
    double a = 2.0 * M_PI * u[1];
    return {r * std::cos(a), r * std::sin(a)};
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits & ((1ULL << 53) - 1)) + 0.5) * 0x1.0p-53;
  }

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
};

// Sequential reader over a CounterRng stream.
class NormalSequence {
 public:
  NormalSequence(const CounterRng& rng, std::uint64_t first_block)
      : rng_(rng), next_(first_block) {}
  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    auto z = rng_.normal_pair(next_++);
    spare_ = z[1];
    have_ = true;
    return z[0];
  }
  double uniform() {
    auto u = rng_.uniform_pair(next_++);
    return u[0];
  }

 private:
  CounterRng rng_;
  std::uint64_t next_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace oconnell
