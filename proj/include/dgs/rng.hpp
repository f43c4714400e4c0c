#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dgs {

/**
 * Philox4x32-10 counter-based generator.
 *
 * A stream is fixed by (seed, stream id); substream(id) derives an independent
 * child so that trial t of a run always sees the same numbers regardless of
 * scheduling.
 */
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed = 0, std::uint64_t stream = 0);

  Philox substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform on {0, ..., n-1}, unbiased (rejection on the top partial block).
  std::uint64_t uniform_below(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace dgs
