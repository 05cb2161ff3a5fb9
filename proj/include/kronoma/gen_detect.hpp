#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kronoma/constellation.hpp"
#include "kronoma/pattern.hpp"
#include "kronoma/rational.hpp"
#include "kronoma/rect_detect.hpp"

namespace kronoma {

struct GeneralDetection {
    DetectStatus status = DetectStatus::Ok;
    std::string failure;
    std::vector<double> symbols;     // length K, user order
    std::vector<int> point_indices;  // per user, index into the base constellation
    std::vector<Rational> path_gains;  // per square path tau' (M_s entries); the
                                       // effective SNR multiplier of that branch
    std::uint64_t combine_adds = 0;
    std::uint64_t mud_candidates = 0;
};

/// Two-phase detection for a general pattern: square-phase combining first
/// (per rectangular-row block), then one rectangular detection per square
/// path with noise variance sigma^2 / gain(path).  Degenerate cases dispatch
/// straight to the square or rectangular detector.  user_scales, when
/// nonempty, holds one uplink gain per user (folded into demodulation).
GeneralDetection detect_general(std::span<const double> y, const KroneckerPattern& pattern,
                                const Constellation& base, double noise_variance,
                                const DetectOptions& opts = {},
                                std::span<const double> user_scales = {});

/// One SIC step: decide the singleton paths of some rows of the final square
/// recursion first, then rebuild other rows' equations from the recursion
/// inputs with the decided contributions cancelled.
///   detect   - rows (columns of P^(1)) decided before any reform
///   reform   - target row rebuilt as sum_{j in from} sign(j) * input_|j|
///              minus the known contributions of the rows in subtract
/// Steps run in order; later steps may rely on earlier decisions.
struct SicReform {
    int target = 0;
    std::vector<int> from;      // signed 1-based input indices within the group
    std::vector<int> subtract;  // rows whose decided symbols get cancelled
};
struct SicStep {
    std::vector<int> detect;
    std::vector<SicReform> reforms;
};
struct SicPolicy {
    std::vector<SicStep> steps;

    bool empty() const { return steps.empty(); }
};

/// Policy JSON: {"steps":[{"detect":[1,2],
///                         "reform":[{"target":3,"from":[2,3],"subtract":[1,2]}]}]}
SicPolicy sic_policy_from_json(const std::string& json_text);
SicPolicy load_sic_policy_file(const std::string& path);

enum class SicMode {
    Imperfect,  // cancel with the decided (possibly wrong) symbols
    Genie,      // cancel with the true symbols; validation aid only
};

/// Per-path gain table after applying the policy (reform targets get
/// gamma = c_target^2 / ||alpha~||_0 in place of the row gain); used by the
/// rate evaluation.  Throws ConfigError for policies that reference missing
/// rows or whose reform combination fails to cancel an undecided row.
std::vector<Rational> sic_revised_gains(const KroneckerPattern& pattern, const SicPolicy& policy);

/// detect_general with the policy applied at the final square recursion.
/// true_symbols (length K) are consulted only in Genie mode.
GeneralDetection detect_with_sic(std::span<const double> y, const KroneckerPattern& pattern,
                                 const Constellation& base, double noise_variance,
                                 const SicPolicy& policy, SicMode mode = SicMode::Imperfect,
                                 std::span<const double> true_symbols = {},
                                 const DetectOptions& opts = {});

}  // namespace kronoma
