#pragma once

#include <cstdint>
#include <limits>

namespace spikelab {

/// Counter-based random stream.
///
/// The i-th output is a pure function of (key, i), so a stream can be
/// re-created anywhere from its key alone. Sub-streams for workers and trials
/// are obtained with derive(); there is no shared state between streams.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed);

  static Stream derive(std::uint64_t master_seed, std::uint64_t a);
  static Stream derive(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Equiprobable +1 / -1.
  double sign();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace spikelab
