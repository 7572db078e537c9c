#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace ssglm {

/// Counter-based random stream.
///
/// Output k of a stream is a pure function of (key, k), and child streams are
/// derived from the parent key by hashing, never by consuming parent output.
/// Work units that each own a substream therefore draw the same numbers no
/// matter which thread runs them or in what order.
///
/// Satisfies UniformRandomBitGenerator so std distributions accept it.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed = 0) noexcept;

  Stream substream(std::uint64_t index) const noexcept;
  Stream substream(std::string_view tag) const noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Uniformly random k-subset of {0, ..., n-1}, sorted ascending.
std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k,
                                                     Stream& stream);

}  // namespace ssglm
