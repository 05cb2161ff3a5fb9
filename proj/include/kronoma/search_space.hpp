#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <utility>

namespace kronoma {

using BigInt = boost::multiprecision::cpp_int;

BigInt binomial(unsigned n, unsigned k);

/// Number of m-by-k binary matrices with distinct nonzero columns, counted
/// up to column order: C(2^m - 1, k). Throws InfeasibleError when k > 2^m - 1
/// (no such matrix exists).
BigInt search_space_size(int m, int k);

/// Product of search_space_size over a factor dimension list.
BigInt factorized_search_space(std::span<const std::pair<int, int>> dims);

}  // namespace kronoma
