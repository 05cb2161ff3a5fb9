#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kronoma/constellation.hpp"
#include "kronoma/gen_detect.hpp"
#include "kronoma/pattern.hpp"

namespace kronoma {

struct FadingConfig {
    enum class Kind { None, Downlink, Uplink };
    Kind kind = Kind::None;
    std::vector<double> gains;  // per RE (downlink) or per user (uplink)
};

/// Monte-Carlo link configuration.  snr_db entries are converted once to
/// linear rho = 10^(dB/10), treated as Es/N0: each real noise dimension gets
/// variance P_x / (2 rho), so a singleton with effective gain g has bit error
/// rate Q(sqrt(2 g rho)) under BPSK.  sigma = 0 (infinite SNR) is the
/// noiseless sentinel.
struct SimConfig {
    KroneckerPattern pattern;
    Constellation base = Constellation::bpsk();
    std::vector<double> snr_db;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    std::vector<int> tracked_users;  // 1-based; empty tracks every user
    SicPolicy sic;
    SicMode sic_mode = SicMode::Imperfect;
    FadingConfig fading;
    int threads = 0;  // 0 = runtime default; results are thread-count invariant
    DetectOptions detect;
};

struct BerCell {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;  // bit errors
    double ber = 0;
    double ci_lo = 0;  // 95% Wilson interval
    double ci_hi = 0;
};

struct BerResult {
    std::vector<int> users;
    std::vector<double> snr_db;
    std::vector<BerCell> cells;  // user-major: cells[u * snr_db.size() + s]
    std::uint64_t noise_checksum = 0;

    const BerCell& at(std::size_t user_idx, std::size_t snr_idx) const {
        return cells[user_idx * snr_db.size() + snr_idx];
    }
};

BerResult simulate_ber(const SimConfig& cfg);
/// Single-threaded reference implementation; must match simulate_ber byte
/// for byte (the keyed RNG makes trial draws independent of scheduling).
BerResult simulate_ber_serial(const SimConfig& cfg);

struct SicComparison {
    BerResult baseline;
    BerResult with_sic;

    /// Horizontal SNR gain (dB) of the SIC curve over the baseline at a
    /// target BER, by log-linear interpolation along each curve.  NaN when a
    /// curve never crosses the target.
    double shift_db_at(double target_ber, int user) const;
};

/// Paired runs under common random numbers: every trial's symbols and noise
/// are shared by both detectors, and the noise checksums are identical by
/// construction.
SicComparison simulate_ber_sic(const SimConfig& cfg);

struct DownlinkNormalized {
    std::vector<double> y;                // y_m / h_m
    std::vector<double> noise_variances;  // sigma^2 / h_m^2 per RE
};

/// Divides out per-RE downlink gains; detection downstream is unchanged and
/// conservatively assumes the worst-RE variance.  Throws on a zero gain.
DownlinkNormalized apply_downlink_fading(std::span<const double> y, std::span<const double> h,
                                         double sigma2);

/// Per-user uplink scaling x~_k = h_k x_k; demodulation divides the scale
/// back out.  Throws on a zero gain (undetectable user).
std::vector<double> apply_uplink_fading(std::span<const double> x, std::span<const double> h);

/// CSV with header user,snr_db,trials,errors,ber,ci_lo,ci_hi; stable float
/// formatting (round-trips byte-identically through parse/reemit).
std::string ber_csv(const BerResult& r);
BerResult ber_csv_parse(const std::string& csv);

double snr_db_to_rho(double snr_db);

}  // namespace kronoma
