#ifndef HETBANDIT_RNG_HPP
#define HETBANDIT_RNG_HPP

#include <array>
#include <cstdint>

namespace hetbandit {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based stream. The 128-bit counter is laid out as
/// (position lo, position hi, tag, lane): two streams with a different
/// (lane, tag) pair never touch the same counter, so they are disjoint by
/// construction. A replication owns a lane; algorithm stages inside it fork
/// tags.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint32_t lane, std::uint32_t tag = 0) noexcept
      : key_(key), lane_(lane), tag_(tag) {}

  /// Fresh stream on the same key and lane with a different tag.
  CounterRng fork(std::uint32_t tag) const noexcept { return CounterRng(key_, lane_, tag); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint32_t lane() const noexcept { return lane_; }
  std::uint32_t tag() const noexcept { return tag_; }
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal by Box-Muller; one block yields two draws.
  double normal() noexcept;

 private:
  std::array<std::uint32_t, 4> next_block() noexcept;

  std::uint64_t key_;
  std::uint32_t lane_;
  std::uint32_t tag_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hetbandit

#endif  // HETBANDIT_RNG_HPP
