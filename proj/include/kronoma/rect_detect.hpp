#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/constellation.hpp"

namespace kronoma {

enum class DetectStatus {
    Ok,
    Ambiguous,   // several assignments fit exactly; the lexicographically
                 // smallest index tuple was returned
    Infeasible,  // noiseless system with no assignment matching within
                 // tolerance (an upstream decision error, unless fallback
                 // resolution was enabled)
};

struct DetectOptions {
    double exact_tol_rel = 1e-9;       // relative tolerance for exact-match search
    bool fallback_nearest = false;     // resolve infeasible systems by nearest match
    std::uint64_t mud_cap = 10'000'000;  // candidate cap per mud call
};

struct MudResult {
    DetectStatus status = DetectStatus::Ok;
    std::vector<int> indices;    // per unknown, index into the symbol space
    std::vector<double> symbols;
    double residual = 0.0;
    std::uint64_t candidates = 0;
};

/// Brute-force MAP over symbol_space^k for the system y ~= F z: exhaustive
/// squared-residual minimization, ties broken by the lexicographically
/// smallest index tuple (the enumeration order).  noise_variance == 0 selects
/// the noiseless exact-match mode, which flags ambiguity when several
/// assignments reach zero residual and infeasibility when none does.
/// column_scales, when nonempty, scales unknown j's symbol (uplink gains).
MudResult mud_map(const BinaryMatrix& f, std::span<const double> y,
                  std::span<const double> symbol_space, double noise_variance,
                  const DetectOptions& opts = {},
                  std::span<const double> column_scales = {});

/// (psi, tau, kappa) addressing of the super-group reached by following
/// `path` = (j_L, j_{L-1}, ..., j_{L-l'+2}) through recursions 1..l'-1:
/// psi numbers the super-group, tau is its first original-symbol index and
/// kappa the stride between consecutive symbol indices it covers.
struct SuperGroupIndex {
    long long psi = 1;
    long long tau = 1;
    long long kappa = 1;
};
SuperGroupIndex index_map(int l_prime, std::span<const int> path,
                          std::span<const BinaryMatrix> factors);

struct SuperGroupTrace {
    std::vector<int> path;  // (j_L, ..., j_{L-l'+1})
    long long tau = 1;
    long long kappa = 1;
    std::vector<double> values;  // solved auxiliaries (or symbols at the end)
};

struct RecursionTrace {
    int level = 1;         // l'
    int factor = 1;        // l'' = L - l' + 1, 1-based
    int systems = 0;       // mud systems solved in this recursion
    int sumset_order = 1;  // order of the symbol space the systems solve over
    std::size_t space_size = 0;
    std::vector<SuperGroupTrace> groups;  // super-groups formed by this recursion
};

struct RectDetection {
    DetectStatus status = DetectStatus::Ok;
    std::string failure;              // human-readable recursion/path annotation
    std::vector<double> symbols;      // length K_r, ordered by user index
    std::vector<int> point_indices;   // indices into the base constellation
    std::vector<RecursionTrace> trace;
    std::uint64_t mud_candidates = 0;
};

/// Recursive detection over a chain of rectangular factors.  Recursion
/// l' = 1..L solves systems built on factor L-l'+1 over the sumset alphabet
/// of order K_{L-l'}; only the first recursion sees noise.  With a single
/// factor this collapses to one direct MUD call.
RectDetection detect_rect(std::span<const double> y, std::span<const BinaryMatrix> factors,
                          const Constellation& base, double noise_variance,
                          const DetectOptions& opts = {},
                          std::span<const double> user_scales = {});

}  // namespace kronoma
