#pragma once

#include <array>
#include <cstdint>

namespace fepic {

// Philox4x32 with 10 rounds (Salmon et al., SC'11). Stateless: the output is
// a pure function of (counter, key).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// What a stream is used for; keeps streams of different phases disjoint.
enum class StreamPurpose : std::uint32_t {
  Injection = 1,
  Collision = 2,
  Test = 0xffff,
};

// A reproducible stream keyed by (seed, purpose, step, object). The draw
// sequence depends only on those keys, never on which thread consumes it.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t step, std::uint32_t object);

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; consumes draws in pairs.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t next64();
  void refill();

  PhiloxKey key_{};
  PhiloxCounter base_{};
  std::uint64_t block_ = 0;
  PhiloxCounter out_{};
  int slot_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fepic
