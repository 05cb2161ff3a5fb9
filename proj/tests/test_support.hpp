#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/rng.hpp"

namespace kronoma::test {

// Direct brute-force MAP over the expanded matrix: the independent oracle the
// recursive detectors are checked against.  Exhaustive over points^K, exact
// residual match, counts all solutions.
struct DirectMapResult {
    std::vector<int> indices;
    std::uint64_t solutions = 0;  // exact matches found
};

inline DirectMapResult direct_map_noiseless(const BinaryMatrix& g, std::span<const double> y,
                                            std::span<const double> points) {
    const int k = g.cols(), m = g.rows();
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    DirectMapResult out;
    for (;;) {
        double resid = 0;
        for (int r = 0; r < m; ++r) {
            double acc = 0;
            for (int c = 0; c < k; ++c)
                if (g.at(r, c)) acc += points[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
            const double d = y[static_cast<std::size_t>(r)] - acc;
            resid += d * d;
        }
        if (resid <= 1e-12) {
            if (out.solutions == 0) out.indices = idx;
            ++out.solutions;
        }
        int j = k - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == static_cast<int>(points.size()) - 1)
            --j;
        if (j < 0) break;
        ++idx[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < k; ++t) idx[static_cast<std::size_t>(t)] = 0;
    }
    return out;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Deterministic small-matrix generator for property tests.
class FactorGen {
  public:
    explicit FactorGen(std::uint64_t seed) : rng_(seed, 0, 0) {}

    BinaryMatrix random_factor(int rows, int cols, bool distinct_nonzero_columns) {
        for (;;) {
            BinaryMatrix m(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    m.set(r, c, static_cast<std::uint8_t>(rng_.next_u32() & 1u));
            const auto v = validate_factor(m);
            if (!distinct_nonzero_columns || v.valid) return m;
        }
    }

    std::uint32_t next_u32() { return rng_.next_u32(); }
    double uniform() { return rng_.uniform(); }
    double gaussian() { return rng_.gaussian(); }

  private:
    TrialRng rng_;
};

}  // namespace kronoma::test
