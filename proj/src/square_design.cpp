#include "kronoma/square_design.hpp"

#include <algorithm>
#include <cmath>

#include "kronoma/errors.hpp"
#include "kronoma/search_space.hpp"

namespace kronoma {

int SquareFactorDesign::alpha_row_nnz(int r) const {
    int n = 0;
    for (int c = 0; c < dim(); ++c) n += alpha_at(r, c) != 0;
    return n;
}

Rational SquareFactorDesign::min_gain() const {
    Rational mn = gains.front();
    for (const auto& g : gains)
        if (g < mn) mn = g;
    return mn;
}

namespace {

// Walks coefficient vectors (a_1..a_m), a_j in {-1,0,+1}, in lexicographic
// order under -1 < 0 < +1 so that the first best survivor is automatically
// the documented tie-break winner.
class CoefficientOdometer {
  public:
    explicit CoefficientOdometer(int m) : coeffs_(m, -1) {}

    std::span<const int> get() const { return coeffs_; }

    bool advance() {
        for (int j = static_cast<int>(coeffs_.size()) - 1; j >= 0; --j) {
            if (coeffs_[j] < 1) {
                ++coeffs_[j];
                std::fill(coeffs_.begin() + j + 1, coeffs_.end(), -1);
                return true;
            }
        }
        return false;
    }

  private:
    std::vector<int> coeffs_;
};

struct RowSearch {
    bool found = false;
    std::vector<std::int8_t> coeffs;
    int weight = 0;
    Rational gain;
    std::uint64_t survivors = 0;  // sign-canonical survivors (w > 0)
};

// Algorithm core for one row i: find coefficient vectors with
//   C1: entries in {-1,0,+1}
//   C2: sum_j a_j p(j,i) = w != 0
//   C3: sum_j a_j p(j,i') = 0 for i' != i
// canonicalized to w > 0, keeping the maximum-gain survivor.
RowSearch search_row(const BinaryMatrix& p, int i) {
    const int m = p.rows();
    RowSearch best;
    CoefficientOdometer odo(m);
    do {
        const auto a = odo.get();
        int w = 0;
        for (int j = 0; j < m; ++j) w += a[j] * p.at(j, i);
        if (w <= 0) continue;  // w==0 fails C2; w<0 is the mirrored duplicate
        bool zeros = true;
        for (int col = 0; col < m && zeros; ++col) {
            if (col == i) continue;
            int s = 0;
            for (int j = 0; j < m; ++j) s += a[j] * p.at(j, col);
            zeros = s == 0;
        }
        if (!zeros) continue;
        ++best.survivors;
        int nnz = 0;
        for (int j = 0; j < m; ++j) nnz += a[j] != 0;
        const Rational gain(static_cast<std::int64_t>(w) * w, nnz);
        if (!best.found || gain > best.gain) {
            best.found = true;
            best.gain = gain;
            best.weight = w;
            best.coeffs.assign(a.begin(), a.end());
        }
        // Equal gain: the odometer order already visited the lexicographically
        // smaller vector first, so keep the incumbent.
    } while (odo.advance());
    return best;
}

// Unordered column sets {c_1 < c_2 < ... < c_m} over nonzero masks 1..2^m-1.
template <typename Fn>
void for_each_candidate(int m, Fn&& fn) {
    const std::uint64_t top = (std::uint64_t{1} << m) - 1;
    std::vector<std::uint64_t> masks(m);
    for (int j = 0; j < m; ++j) masks[j] = j + 1;
    for (;;) {
        fn(std::span<const std::uint64_t>(masks));
        int j = m - 1;
        while (j >= 0 && masks[j] == top - (m - 1 - j)) --j;
        if (j < 0) break;
        ++masks[j];
        for (int t = j + 1; t < m; ++t) masks[t] = masks[t - 1] + 1;
    }
}

std::uint64_t candidate_count_or_throw(int m, const DesignLimits& limits) {
    const BigInt count = search_space_size(m, m);
    if (count > limits.enumeration_cap)
        throw InfeasibleError("enumerate_square_designs: C(2^" + std::to_string(m) + "-1," +
                              std::to_string(m) +
                              ") exceeds the enumeration cap; supply an explicit factor instead");
    return count.convert_to<std::uint64_t>();
}

}  // namespace

std::optional<SquareFactorDesign> find_combining(const BinaryMatrix& p) {
    if (p.rows() != p.cols()) throw ConfigError("find_combining: matrix must be square");
    const int m = p.rows();
    SquareFactorDesign design;
    design.p = p;
    design.alpha.assign(static_cast<std::size_t>(m) * m, 0);
    design.weights.resize(m);
    design.gains.resize(m);
    for (int i = 0; i < m; ++i) {
        const RowSearch row = search_row(p, i);
        if (!row.found) return std::nullopt;  // skip rule: no combining matrix
        std::copy(row.coeffs.begin(), row.coeffs.end(),
                  design.alpha.begin() + static_cast<std::size_t>(i) * m);
        design.weights[i] = row.weight;
        design.gains[i] = row.gain;
    }
    return design;
}

std::vector<SquareFactorDesign> enumerate_square_designs_serial(int m,
                                                                const DesignLimits& limits) {
    candidate_count_or_throw(m, limits);
    std::vector<SquareFactorDesign> out;
    for_each_candidate(m, [&](std::span<const std::uint64_t> masks) {
        const BinaryMatrix p = BinaryMatrix::from_column_masks(m, masks);
        if (auto design = find_combining(p)) out.push_back(std::move(*design));
    });
    return out;
}

std::vector<SquareFactorDesign> enumerate_square_designs(int m, const DesignLimits& limits) {
    const std::uint64_t total = candidate_count_or_throw(m, limits);
    // Materialize the canonical candidate order once, then scan it in
    // parallel; collection by index keeps the output order deterministic
    // regardless of the schedule.
    std::vector<std::uint64_t> flat;
    flat.reserve(total * m);
    for_each_candidate(m, [&](std::span<const std::uint64_t> masks) {
        flat.insert(flat.end(), masks.begin(), masks.end());
    });
    const std::int64_t n = static_cast<std::int64_t>(total);
    std::vector<std::optional<SquareFactorDesign>> slots(total);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t v = 0; v < n; ++v) {
        const BinaryMatrix p = BinaryMatrix::from_column_masks(
            m, std::span<const std::uint64_t>(flat.data() + v * m, static_cast<std::size_t>(m)));
        slots[v] = find_combining(p);
    }
    std::vector<SquareFactorDesign> out;
    for (auto& slot : slots)
        if (slot) out.push_back(std::move(*slot));
    return out;
}

SquareFactorDesign select_optimal_square(int m, DesignCriterion criterion, double rho,
                                         const DesignLimits& limits) {
    const auto designs = enumerate_square_designs(m, limits);
    if (designs.empty())
        throw InfeasibleError("select_optimal_square: no " + std::to_string(m) + "x" +
                              std::to_string(m) + " factor admits a combining matrix");
    auto sum_rate_score = [rho](const SquareFactorDesign& d) {
        double acc = 0;
        for (const auto& g : d.gains) acc += std::log2(1.0 + g.to_double() * rho);
        return acc;
    };
    const SquareFactorDesign* best = &designs.front();
    for (const auto& d : designs) {
        bool better = false;
        switch (criterion) {
            case DesignCriterion::MaxMinGain:
                better = d.min_gain() > best->min_gain();
                break;
            case DesignCriterion::SumRate:
                better = sum_rate_score(d) > sum_rate_score(*best);
                break;
            case DesignCriterion::GainProduct: {
                Rational pd(1), pb(1);
                for (const auto& g : d.gains) pd = pd * g;
                for (const auto& g : best->gains) pb = pb * g;
                better = pd > pb;
                break;
            }
        }
        if (better) best = &d;  // ties keep the earlier canonical candidate
    }
    return *best;
}

std::uint64_t count_combining_matrices(const BinaryMatrix& p) {
    if (p.rows() != p.cols()) throw ConfigError("count_combining_matrices: matrix must be square");
    std::uint64_t total = 1;
    for (int i = 0; i < p.rows(); ++i) {
        total *= search_row(p, i).survivors;
        if (total == 0) return 0;
    }
    return total;
}

}  // namespace kronoma
