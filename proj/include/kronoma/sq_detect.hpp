#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kronoma/rational.hpp"
#include "kronoma/square_design.hpp"

namespace kronoma {

/// Result of running all L combining recursions on a received vector of
/// length M = prod m_l: M singleton observations
///     values[i-1] = W_i * x_i + n_i,   var(n_i) = noise_var_factors[i-1] * sigma^2
/// with W_i the product of the diagonal weights along the index path of i and
/// W_i^2 / noise_var_factors[i-1] equal to the overall SNR gain of symbol i.
struct SquareDetection {
    std::vector<double> values;
    std::vector<long long> scales;
    std::vector<Rational> noise_var_factors;
    std::vector<std::uint64_t> adds_per_recursion;

    std::uint64_t total_adds() const {
        std::uint64_t n = 0;
        for (auto a : adds_per_recursion) n += a;
        return n;
    }
};

// Index map used by the recursion (the prose grouping made explicit).
//
// View the signal vector as a row-major tensor of shape (m_1, ..., m_L):
// position i-1 has mixed-radix digits (s_1-1, ..., s_L-1) with s_1 the most
// significant.  Recursion l' = 1..L combines along axis l = L-l'+1, i.e. over
// the strided slice {base + t*stride_l : t = 0..m_l-1} with
// stride_l = m_{l+1}*...*m_L, replacing slice entry j-1 by the alpha^{(l)}
// row-j combination.  Groups of
// the first recursion are therefore consecutive m_L-blocks, each later
// "super-group" is the set of positions sharing all already-processed digits,
// and the final value at digit tuple (s_1-1, ..., s_L-1) is the singleton of
// data symbol i = mixed-radix(s_1, ..., s_L) exactly as the gain lemma's digit
// decomposition demands.  No data movement is needed.

/// In-place combining over one length-M block.  Each combined output is the
/// dense signed accumulation over its m_l inputs and costs exactly m_l - 1
/// executed additions (coefficients are applied by sign selection, never by
/// multiplication); adds_per_recursion, when nonempty, receives those counts.
void combine_square_inplace(std::span<double> values,
                            std::span<const SquareFactorDesign> designs,
                            std::span<std::uint64_t> adds_per_recursion = {});

/// Same, but stops before the leading skip_axes factors: runs recursions
/// 1..L-skip_axes only (axes L-1 down to skip_axes).  Used when the final
/// recursion needs nonstandard combining (interference cancellation).
void combine_square_suffix(std::span<double> values,
                           std::span<const SquareFactorDesign> designs, int skip_axes,
                           std::span<std::uint64_t> adds_per_recursion = {});

/// Full detection: combining plus the per-index scale/noise bookkeeping.
/// Throws ConfigError when y.size() != prod m_l.
SquareDetection detect_square(std::span<const double> y,
                              std::span<const SquareFactorDesign> designs);

/// Digits (s_1, ..., s_L), s_l in 1..m_l, of the 1-based symbol index i.
std::vector<int> symbol_digits(long long i, std::span<const SquareFactorDesign> designs);

/// Overall SNR gain of symbol i: product of gamma^{(l)}_{s_l} over its digits.
Rational overall_gain(long long i, std::span<const SquareFactorDesign> designs);

/// All M overall gains, ordered by data-symbol index, computed by walking the
/// gain tree (independent of the per-index digit decomposition).
std::vector<Rational> gain_tree(std::span<const SquareFactorDesign> designs);

/// Per-index singleton scales W_i and noise variance factors, same order.
std::vector<long long> scale_table(std::span<const SquareFactorDesign> designs);
std::vector<Rational> noise_variance_factor_table(std::span<const SquareFactorDesign> designs);

}  // namespace kronoma
