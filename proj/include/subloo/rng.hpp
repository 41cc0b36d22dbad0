#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace subloo {

// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
// independent sequence, so replicate experiments can derive sub-streams from
// (seed, replicate-id, purpose-tag) and run them concurrently without any
// shared state. Output is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static Rng derive(std::uint64_t seed, std::uint64_t replicate,
                    std::string_view tag);

  // Deterministic sub-seed for handing to components that take a plain seed.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate,
                                   std::string_view tag);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

  // Unbiased uniform integer on [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  // Standard normal via Box-Muller (pairs cached).
  double next_normal();

  // Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang).
  double next_gamma(double shape);

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32_10(
      std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;  // {block_lo, block_hi, stream_lo, stream_hi}
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace subloo
