#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/rational.hpp"

namespace kronoma {

/// A square pattern factor P together with its combining matrix alpha
/// (entries in {-1,0,+1}), chosen so that alpha*P is diagonal with nonzero
/// diagonal weights w_i.  Rows of alpha are sign-canonicalized to w_i > 0;
/// flipping a whole row flips w_i but leaves the SNR gain
/// gamma_i = w_i^2 / ||alpha_i||_0 unchanged, so the positive-weight
/// representative is the convention everywhere in this library.
struct SquareFactorDesign {
    BinaryMatrix p;
    std::vector<std::int8_t> alpha;  // row-major m*m, entries -1/0/+1
    std::vector<int> weights;        // w_i > 0
    std::vector<Rational> gains;     // gamma_i, exact

    int dim() const { return p.rows(); }
    int alpha_at(int r, int c) const { return alpha[static_cast<std::size_t>(r) * dim() + c]; }
    int alpha_row_nnz(int r) const;
    Rational min_gain() const;
};

struct DesignLimits {
    std::uint64_t enumeration_cap = 1'000'000;  // bound on C(2^m - 1, m); covers m <= 5
};

/// Row-wise search over all 3^m coefficient vectors per row (the diagonality
/// conditions decouple by row, so the full 3^(m*m) matrix search is never
/// needed).  For each row the survivor with maximum gain wins; among equals
/// the lexicographically smallest vector under -1 < 0 < +1 is kept.
/// Returns nullopt when some row has no survivor.
std::optional<SquareFactorDesign> find_combining(const BinaryMatrix& p);

/// All m-by-m candidates with distinct nonzero columns, iterated as unordered
/// column sets in canonical order (ascending column bitmask, LSB = first
/// row), keeping those that admit a combining matrix.  Parallelized across
/// candidates with order-preserving collection.
std::vector<SquareFactorDesign> enumerate_square_designs(int m, const DesignLimits& limits = {});

/// Single-threaded reference for the enumeration; kept for testing the
/// parallel path against.
std::vector<SquareFactorDesign> enumerate_square_designs_serial(int m,
                                                                const DesignLimits& limits = {});

enum class DesignCriterion {
    MaxMinGain,   // maximize the smallest per-row gain
    SumRate,      // maximize sum_i log2(1 + gamma_i * rho) at a given rho
    GainProduct,  // maximize the product of gains
};

/// Best design for the criterion; deterministic tie-break on the canonical
/// column-mask tuple.  Throws InfeasibleError when the dimension admits no
/// combining matrix at all.
SquareFactorDesign select_optimal_square(int m, DesignCriterion criterion, double rho = 1.0,
                                         const DesignLimits& limits = {});

/// Exhaustive count of whole combining matrices for p, as the product of
/// per-row survivor counts (rows sign-canonicalized to positive weight, since
/// a row and its negation are the same combining choice).  Test support for
/// the uniqueness property: linearly independent rows imply a count <= 1.
std::uint64_t count_combining_matrices(const BinaryMatrix& p);

}  // namespace kronoma
