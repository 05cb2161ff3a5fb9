#include "kronoma/search_space.hpp"

#include "kronoma/errors.hpp"

namespace kronoma {

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt acc = 1;
    // acc stays integral at each step: after i iterations it equals C(n-k+i, i).
    for (unsigned i = 1; i <= k; ++i) {
        acc *= n - k + i;
        acc /= i;
    }
    return acc;
}

BigInt search_space_size(int m, int k) {
    if (m < 1 || k < 1) throw ConfigError("search_space_size: dimensions must be positive");
    if (m > 32) throw InfeasibleError("search_space_size: m > 32 is beyond desk scale");
    const std::uint64_t n = (std::uint64_t{1} << m) - 1;
    if (static_cast<std::uint64_t>(k) > n)
        throw InfeasibleError("search_space_size: no " + std::to_string(m) + "x" +
                              std::to_string(k) +
                              " matrix with distinct nonzero columns exists (k > 2^m - 1)");
    return binomial(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

BigInt factorized_search_space(std::span<const std::pair<int, int>> dims) {
    BigInt acc = 1;
    for (const auto& [m, k] : dims) acc *= search_space_size(m, k);
    return acc;
}

}  // namespace kronoma
