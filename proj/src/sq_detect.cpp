#include "kronoma/sq_detect.hpp"

#include <array>

#include "kronoma/errors.hpp"

namespace kronoma {

namespace {

long long product_dim(std::span<const SquareFactorDesign> designs) {
    long long m = 1;
    for (const auto& d : designs) m *= d.dim();
    return m;
}

inline double signed_term(int coeff, double v) {
    return coeff > 0 ? v : (coeff < 0 ? -v : 0.0);
}

}  // namespace

void combine_square_inplace(std::span<double> values,
                            std::span<const SquareFactorDesign> designs,
                            std::span<std::uint64_t> adds_per_recursion) {
    combine_square_suffix(values, designs, 0, adds_per_recursion);
}

void combine_square_suffix(std::span<double> values,
                           std::span<const SquareFactorDesign> designs, int skip_axes,
                           std::span<std::uint64_t> adds_per_recursion) {
    const long long total = product_dim(designs);
    if (static_cast<long long>(values.size()) != total)
        throw ConfigError("combine_square: signal length does not match the factor dimensions");
    const int levels = static_cast<int>(designs.size());
    if (skip_axes < 0 || skip_axes > levels)
        throw ConfigError("combine_square: bad skip_axes");
    const int recursions = levels - skip_axes;
    if (!adds_per_recursion.empty() &&
        static_cast<int>(adds_per_recursion.size()) != recursions)
        throw ConfigError("combine_square: counter span must have one slot per recursion");

    long long stride = 1;
    std::array<double, 64> tmp;  // factor dims are tiny; 64 is far beyond desk scale
    for (int lp = 1; lp <= recursions; ++lp) {
        const int l = levels - lp;  // recursion lp combines along factor axis l (0-based)
        const auto& d = designs[l];
        const int m = d.dim();
        if (m > static_cast<int>(tmp.size()))
            throw InfeasibleError("combine_square: factor dimension beyond desk scale");
        std::uint64_t adds = 0;
        const long long block = stride * m;
        for (long long base = 0; base < total; base += block) {
            for (long long off = 0; off < stride; ++off) {
                double* slice = values.data() + base + off;
                for (int t = 0; t < m; ++t) tmp[t] = slice[t * stride];
                for (int j = 0; j < m; ++j) {
                    const std::int8_t* row = d.alpha.data() + static_cast<std::size_t>(j) * m;
                    double acc = signed_term(row[0], tmp[0]);
                    for (int t = 1; t < m; ++t) acc += signed_term(row[t], tmp[t]);
                    slice[j * stride] = acc;
                }
                adds += static_cast<std::uint64_t>(m) * (m - 1);
            }
        }
        if (!adds_per_recursion.empty()) adds_per_recursion[lp - 1] = adds;
        stride = block;
    }
}

SquareDetection detect_square(std::span<const double> y,
                              std::span<const SquareFactorDesign> designs) {
    SquareDetection out;
    out.values.assign(y.begin(), y.end());
    out.adds_per_recursion.assign(designs.size(), 0);
    combine_square_inplace(out.values, designs, out.adds_per_recursion);
    out.scales = scale_table(designs);
    out.noise_var_factors = noise_variance_factor_table(designs);
    return out;
}

std::vector<int> symbol_digits(long long i, std::span<const SquareFactorDesign> designs) {
    const long long total = product_dim(designs);
    if (i < 1 || i > total) throw ConfigError("symbol index out of range");
    std::vector<int> digits(designs.size());
    long long rem = i - 1;
    for (int l = static_cast<int>(designs.size()) - 1; l >= 0; --l) {
        const int m = designs[l].dim();
        digits[l] = static_cast<int>(rem % m) + 1;
        rem /= m;
    }
    return digits;
}

Rational overall_gain(long long i, std::span<const SquareFactorDesign> designs) {
    const auto digits = symbol_digits(i, designs);
    Rational g(1);
    for (std::size_t l = 0; l < designs.size(); ++l) g = g * designs[l].gains[digits[l] - 1];
    return g;
}

namespace {

template <typename Acc, typename Get>
std::vector<Acc> walk_tree(std::span<const SquareFactorDesign> designs, Acc unit, Get&& get) {
    std::vector<Acc> out(static_cast<std::size_t>(product_dim(designs)), unit);
    // Depth-first over digit tuples; idx accumulates the mixed-radix value so
    // entries land already sorted by data-symbol index.
    auto dfs = [&](auto&& self, std::size_t level, long long idx, Acc acc) -> void {
        if (level == designs.size()) {
            out[static_cast<std::size_t>(idx)] = acc;
            return;
        }
        const auto& d = designs[level];
        for (int s = 0; s < d.dim(); ++s)
            self(self, level + 1, idx * d.dim() + s, acc * get(d, s));
    };
    dfs(dfs, 0, 0, unit);
    return out;
}

}  // namespace

std::vector<Rational> gain_tree(std::span<const SquareFactorDesign> designs) {
    return walk_tree(designs, Rational(1),
                     [](const SquareFactorDesign& d, int s) { return d.gains[s]; });
}

std::vector<long long> scale_table(std::span<const SquareFactorDesign> designs) {
    return walk_tree(designs, 1LL, [](const SquareFactorDesign& d, int s) {
        return static_cast<long long>(d.weights[s]);
    });
}

std::vector<Rational> noise_variance_factor_table(std::span<const SquareFactorDesign> designs) {
    return walk_tree(designs, Rational(1), [](const SquareFactorDesign& d, int s) {
        return Rational(d.alpha_row_nnz(s));
    });
}

}  // namespace kronoma
