#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/constellation.hpp"
#include "kronoma/pattern.hpp"
#include "kronoma/rational.hpp"
#include "kronoma/search_space.hpp"

namespace kronoma {

/// Per-RE average sum rate (bits/RE) of the recursive scheme at linear SNR
/// rho: (1/2M) * sum over square paths of log2 det(I + rho*gain*F F^T), with
/// F the expanded rectangular sub-pattern.  Deterministic summation order
/// (path order, pairwise reduction).
double sum_rate_general(const KroneckerPattern& pattern, double rho);

/// Same, with the per-path gain table replaced (interference-cancellation
/// reforms); revised_gains must have one entry per square path.
double sum_rate_with_gains(const KroneckerPattern& pattern, double rho,
                           std::span<const Rational> revised_gains);

/// Closed multinomial form for F (x) P^{(x) L_s} with one repeated square
/// design; agrees with sum_rate_general on shared inputs.
double sum_rate_identical(const BinaryMatrix& rect_expanded, const SquareFactorDesign& design,
                          int l_s, double rho);

/// PDMA baseline: (1/2M) log2 det(I + rho * A A^T).
double pdma_capacity(const BinaryMatrix& a, double rho);

/// Timing and operation-count model of the per-factor MUD solves.  The
/// defaults charge brute-force MAP: one unit of time per candidate, and per
/// candidate the residual-evaluation adds and squaring muls.  The paper-side
/// bounds treat these as abstract functions; this concrete accounting is the
/// library's own convention.
struct CostModel {
    double t_add = 1.0;
    std::function<double(const BinaryMatrix&, std::size_t)> t_mud_noisy;
    std::function<double(const BinaryMatrix&, std::size_t)> t_mud_noiseless;
    std::function<std::uint64_t(const BinaryMatrix&, std::size_t)> adds_mud_noisy;
    std::function<std::uint64_t(const BinaryMatrix&, std::size_t)> adds_mud_noiseless;
    std::function<std::uint64_t(const BinaryMatrix&, std::size_t)> muls_mud_noisy;
    std::function<std::uint64_t(const BinaryMatrix&, std::size_t)> muls_mud_noiseless;

    static CostModel brute_force_map();
};

/// Worst-case detection latency in time units: t_add * sum(m'_ls - 1) for the
/// fully parallel combining recursions, plus the rectangular MUD chain (one
/// noisy solve, the noiseless middle solves, the final solve).  A single
/// rectangular factor degenerates to one noisy solve over the base alphabet;
/// with none, only the combining term remains.
double latency_worst_case(const KroneckerPattern& pattern, const Constellation& base,
                          const CostModel& cost = CostModel::brute_force_map());

struct OpCounts {
    std::uint64_t adds = 0;
    std::uint64_t muls = 0;
};

/// Maximum operation totals for detecting all K symbols: M * sum(m'_ls - 1)
/// combining adds plus M_s copies of the rectangular chain counts.
OpCounts op_counts(const KroneckerPattern& pattern, const Constellation& base,
                   const CostModel& cost = CostModel::brute_force_map());

struct SearchSpaceCounts {
    BigInt recursive;  // candidate evaluations across all recursive MUD solves
    BigInt direct;     // |C0|^K for one-shot MAP over the expanded pattern
};

/// MAP candidate counting for a rectangular-only pattern.
SearchSpaceCounts map_search_space(const KroneckerPattern& pattern, const Constellation& base);

struct Table1Params {
    double t_in = 1;
    double t_out = 1;
    double c0 = 2;   // |C_0|
    double d_f = 0;  // 0 = derive from the pattern (max row weights)
    double d_g = 0;
};

struct Table1Row {
    std::string algorithm;
    double adds;
    double muls;
};

/// The six asymptotic complexity rows (unit constants): SIC / BP / BP-IDD,
/// each applied directly to G and behind the recursive square phase.
/// Order-of-magnitude expressions only; rows are not comparable in absolute
/// terms.
std::vector<Table1Row> table1_estimates(const KroneckerPattern& pattern,
                                        const Table1Params& params = {});

}  // namespace kronoma
