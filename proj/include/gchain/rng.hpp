#pragma once

#include <array>
#include <cstdint>

namespace gchain {

/// Counter-based uniform generator (Philox-4x64-10, Salmon et al. 2011).
///
/// The key is (seed, replica_id) and the counter is the block index, so
/// streams with distinct replica ids are independent by construction of the
/// generator family: no jump-ahead or seeding discipline is needed to keep
/// parallel replicas disjoint. Same (seed, replica_id) reproduces the same
/// sequence bit-exactly on any platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed, std::uint64_t replica_id = 0) noexcept
      : seed_(seed), replica_id_(replica_id) {}

  std::uint64_t next_u64() noexcept {
    if (lane_ == 4) refill();
    ++drawn_;
    return block_[lane_++];
  }

  /// Uniform in [0,1) with 53 random mantissa bits.
  double next_u01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replica_id() const noexcept { return replica_id_; }
  /// Number of 64-bit values drawn so far.
  std::uint64_t position() const noexcept { return drawn_; }

 private:
  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                      std::uint64_t& lo) noexcept {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
  }

  void refill() noexcept {
    // Round multipliers and Weyl key increments from the Random123 reference.
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

    std::uint64_t x0 = counter_, x1 = 0, x2 = 0, x3 = 0;
    std::uint64_t k0 = seed_, k1 = replica_id_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi0, lo0, hi1, lo1;
      mulhilo(kMul0, x0, hi0, lo0);
      mulhilo(kMul1, x2, hi1, lo1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    block_ = {x0, x1, x2, x3};
    ++counter_;
    lane_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t replica_id_;
  std::uint64_t counter_ = 0;
  std::uint64_t drawn_ = 0;
  std::array<std::uint64_t, 4> block_{};
  int lane_ = 4;
};

}  // namespace gchain
