#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kronoma {

/// Default cap on rows*cols of any expanded matrix (2^24 entries). Requests
/// beyond it signal an infeasible desk-scale configuration, not a bug.
inline constexpr std::size_t kDefaultSizeCap = std::size_t{1} << 24;

/// Dense row-major {0,1} matrix. When used as a pattern factor, every column
/// must be nonzero and pairwise distinct; construction does not enforce that
/// (validate_factor reports it) because intermediate matrices may be anything.
class BinaryMatrix {
  public:
    BinaryMatrix() = default;
    BinaryMatrix(int rows, int cols);
    BinaryMatrix(std::initializer_list<std::initializer_list<int>> rows);

    static BinaryMatrix from_rows(const std::vector<std::vector<int>>& rows);
    /// Column c is the bit pattern of masks[c], LSB = first row.
    static BinaryMatrix from_column_masks(int rows, std::span<const std::uint64_t> masks);
    static BinaryMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    std::uint8_t at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    void set(int r, int c, std::uint8_t v) { data_[static_cast<std::size_t>(r) * cols_ + c] = v; }

    std::uint64_t column_mask(int c) const;  // LSB = first row
    int row_weight(int r) const;
    int max_row_weight() const;
    std::size_t ones_count() const;

    bool operator==(const BinaryMatrix& o) const = default;

    std::string to_text() const;  // aligned 0/1 rows, for CLI output

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Kronecker product; block (i,j) of the result equals a(i,j)*b.
/// Throws InfeasibleError when the result would exceed size_cap entries.
BinaryMatrix kronecker(const BinaryMatrix& a, const BinaryMatrix& b,
                       std::size_t size_cap = kDefaultSizeCap);

/// Left fold of kronecker over the factor list, in order.
BinaryMatrix kronecker_chain(std::span<const BinaryMatrix> factors,
                             std::size_t size_cap = kDefaultSizeCap);

struct FactorValidity {
    bool valid = true;
    std::vector<int> zero_columns;                      // 1-based
    std::vector<std::pair<int, int>> duplicate_columns;  // 1-based pairs
};

/// Checks the pattern-factor column conditions: nonzero, pairwise distinct.
FactorValidity validate_factor(const BinaryMatrix& m);

/// Exact rank test over the rationals (integer Gaussian elimination).
bool rows_linearly_independent(const BinaryMatrix& m);

}  // namespace kronoma
