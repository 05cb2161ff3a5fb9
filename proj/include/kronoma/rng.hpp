#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kronoma {

/// Philox-style 4x32 counter-based generator (10 rounds).  A block is a pure
/// function of (counter, key), so any (seed, snr index, trial index) triple
/// addresses its own stream and parallel sharding cannot reorder draws.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t kMul0 = 0xD2511F53, kMul1 = 0xCD9E8D57;
        constexpr std::uint32_t kBump0 = 0x9E3779B9, kBump1 = 0xBB67AE85;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kBump0;
            key[1] += kBump1;
        }
        return ctr;
    }
};

/// Draw stream for one (seed, snr_index, trial_index) cell.
class TrialRng {
  public:
    TrialRng(std::uint64_t seed, std::uint32_t snr_index, std::uint64_t trial_index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{snr_index, static_cast<std::uint32_t>(trial_index),
                static_cast<std::uint32_t>(trial_index >> 32), 0} {}

    std::uint32_t next_u32() {
        if (word_ == 4) {
            ++base_[3];
            buf_ = Philox4x32::block(base_, key_);
            word_ = 0;
        }
        return buf_[word_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform in (0, 1]; never 0, safe under log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Unbiased-enough index in [0, n): multiply-shift on 32 bits.
    std::uint32_t index(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(next_u32()) * n) >> 32);
    }

    /// Standard normal via Box-Muller, one spare cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::array<std::uint32_t, 4> buf_{};
    int word_ = 4;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace kronoma
