#include "fepic/rng.hpp"

#include <cmath>

#include "fepic/constants.hpp"

namespace fepic {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMulA, c[0], hi0, lo0);
    mulhilo(kMulB, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeylA;
    k[1] += kWeylB;
  }
  return c;
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t step,
                     std::uint32_t object) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  // counter layout: [block, object, step, purpose | step_hi]
  base_ = {0u, object, static_cast<std::uint32_t>(step),
           (static_cast<std::uint32_t>(purpose) << 16) ^ static_cast<std::uint32_t>(step >> 32)};
}

void RngStream::refill() {
  PhiloxCounter c = base_;
  c[0] = static_cast<std::uint32_t>(block_);
  // Streams longer than 2^32 blocks spill into the object word's high bits;
  // no caller comes close.
  c[1] ^= static_cast<std::uint32_t>(block_ >> 32) << 24;
  out_ = philox4x32_10(c, key_);
  ++block_;
  slot_ = 0;
}

std::uint64_t RngStream::next64() {
  if (slot_ >= 4) refill();
  const std::uint64_t v = (static_cast<std::uint64_t>(out_[slot_]) << 32) | out_[slot_ + 1];
  slot_ += 2;
  return v;
}

double RngStream::uniform() { return static_cast<double>(next64() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * constants::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = next64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

}  // namespace fepic
