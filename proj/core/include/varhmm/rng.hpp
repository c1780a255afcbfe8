#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace varhmm {

/// FNV-1a 64-bit hash; used for checksums and to key named substreams.
std::uint64_t fnv1a64(std::string_view bytes);

/// Seedable random stream.
///
/// Identical (seed, stream_id) pairs reproduce the same draw sequence;
/// distinct stream ids give statistically independent streams. A stream is
/// owned by one logical thread of execution; independent streams may be
/// used concurrently.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Child stream keyed by `substream`; its sequence does not depend on
  /// how much of the parent sequence has been consumed.
  RngStream derive(std::uint64_t substream) const;
  RngStream derive(std::string_view name) const;

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  /// Uniform draw on [0, 1).
  double uniform();
  /// Standard normal draw.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace varhmm
