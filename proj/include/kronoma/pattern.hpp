#pragma once

#include <span>
#include <string>
#include <vector>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/rational.hpp"
#include "kronoma/square_design.hpp"

namespace kronoma {

/// Overall pattern = (rectangular factors, left to right) Kronecker
/// (square factors, left to right).  Rectangular factors are strictly wide
/// (k_l > m_l); square factors carry their combining design.
class KroneckerPattern {
  public:
    KroneckerPattern() = default;

    /// Validates factor shapes and column conditions, and derives the
    /// combining design of every square factor (InfeasibleError when a square
    /// factor admits none).
    static KroneckerPattern build(std::vector<BinaryMatrix> rect_factors,
                                  std::vector<BinaryMatrix> square_factors,
                                  std::size_t size_cap = kDefaultSizeCap);

    const std::vector<BinaryMatrix>& rect_factors() const { return rect_; }
    const std::vector<SquareFactorDesign>& square_designs() const { return square_; }

    long long rect_rows() const;    // M_r
    long long rect_cols() const;    // K_r
    long long square_size() const;  // M_s
    long long total_rows() const { return rect_rows() * square_size(); }  // M
    long long total_cols() const { return rect_cols() * square_size(); }  // K
    Rational overload_factor() const;                                     // beta = K/M

    bool pure_square() const { return rect_.empty(); }
    bool pure_rect() const { return square_.empty(); }

    /// Left-to-right Kronecker product of all factors; M x K.
    BinaryMatrix expand(std::size_t size_cap = kDefaultSizeCap) const;

    /// Expanded rectangular sub-pattern F (M_r x K_r); 1x1 all-ones matrix
    /// when there are no rectangular factors.
    BinaryMatrix rect_expand(std::size_t size_cap = kDefaultSizeCap) const;

  private:
    std::vector<BinaryMatrix> rect_;
    std::vector<SquareFactorDesign> square_;
};

/// Pattern spec JSON: {"rect":[[[1,0,1],[1,1,0]],...],"square":[...]}
/// with rows as arrays of 0/1 integers.  Shared by every CLI command.
KroneckerPattern pattern_from_json(const std::string& json_text,
                                   std::size_t size_cap = kDefaultSizeCap);
KroneckerPattern load_pattern_file(const std::string& path,
                                   std::size_t size_cap = kDefaultSizeCap);
std::string pattern_to_json(const KroneckerPattern& pattern);

}  // namespace kronoma
