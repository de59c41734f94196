#pragma once

#include <cstdint>
#include <limits>

namespace cgp {

/// Counter-based 64-bit generator: the i-th output is
/// splitmix64_finalize(key + i * 0x9E3779B97F4A7C15) with
/// key = splitmix64_finalize(seed). Streams are fully determined by
/// (seed, counter) and identical on every platform.
///
/// Splitting rule: child stream k of a stream with seed s has seed
/// splitmix64_finalize(s ^ splitmix64_finalize(k + 0xD1B54A32D192ED03)).
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low();
  /// Standard normal (Box-Muller, second variate cached).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  RngStream split(std::uint64_t k) const;
  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z);

}  // namespace cgp
