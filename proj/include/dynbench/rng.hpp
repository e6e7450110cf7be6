#pragma once

#include <array>
#include <cstdint>

namespace dynbench {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the Philox key. The 128-bit counter is split into a
/// 64-bit block index (low words) and a 64-bit stream id (high words), so
/// every (seed, stream) pair addresses an independent sequence of 2^64 blocks.
/// Outputs depend only on integer arithmetic and are identical on every
/// platform; normal draws use Box-Muller on top of that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream-id layout. A stream id packs a purpose tag in the top byte and up to
/// three small indices below it, so streams for distinct purposes never
/// collide:
///   bits 56..63 purpose, bits 36..55 a, bits 16..35 b, bits 0..15 c.
enum class StreamPurpose : std::uint8_t {
  Dynamics = 1,    // a = trajectory realization
  Noise = 2,       // a = trajectory realization, b = noise realization, c = split
  Bootstrap = 3,   // a = replica
  Sampling = 4,    // a = window (low bits), b = block
  Oracle = 5,
  Init = 6,
  Test = 15,
};

std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t a = 0, std::uint64_t b = 0,
                        std::uint64_t c = 0);

}  // namespace dynbench
