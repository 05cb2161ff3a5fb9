#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/errors.hpp"
#include "kronoma/square_design.hpp"
#include "test_support.hpp"

using namespace kronoma;

namespace {

const BinaryMatrix kP1{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
const BinaryMatrix kP2{{0, 0, 0, 1}, {0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 0}};

bool alpha_p_is_diagonal(const SquareFactorDesign& d) {
    const int m = d.dim();
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < m; ++c) {
            long long acc = 0;
            for (int j = 0; j < m; ++j) acc += d.alpha_at(i, j) * d.p.at(j, c);
            if (i == c) {
                if (acc != d.weights[static_cast<std::size_t>(i)] || acc == 0) return false;
            } else if (acc != 0) {
                return false;
            }
        }
    return true;
}

// Whole-matrix search over all 3^(m*m) combining matrices, canonicalized to
// positive diagonal weights; independent of the row-wise implementation.
struct BruteRow {
    std::vector<int> coeffs;
    int weight;
    Rational gain;
};

std::vector<std::vector<BruteRow>> brute_rows(const BinaryMatrix& p) {
    const int m = p.rows();
    std::vector<std::vector<BruteRow>> rows(static_cast<std::size_t>(m));
    std::vector<int> a(static_cast<std::size_t>(m), -1);
    for (;;) {
        for (int i = 0; i < m; ++i) {
            int w = 0;
            for (int j = 0; j < m; ++j) w += a[static_cast<std::size_t>(j)] * p.at(j, i);
            if (w <= 0) continue;
            bool ok = true;
            for (int c = 0; c < m && ok; ++c) {
                if (c == i) continue;
                int s = 0;
                for (int j = 0; j < m; ++j) s += a[static_cast<std::size_t>(j)] * p.at(j, c);
                ok = s == 0;
            }
            if (!ok) continue;
            int nnz = 0;
            for (int v : a) nnz += v != 0;
            rows[static_cast<std::size_t>(i)].push_back(
                {a, w, Rational(static_cast<std::int64_t>(w) * w, nnz)});
        }
        int j = m - 1;
        while (j >= 0 && a[static_cast<std::size_t>(j)] == 1) --j;
        if (j < 0) break;
        ++a[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < m; ++t) a[static_cast<std::size_t>(t)] = -1;
    }
    return rows;
}

}  // namespace

TEST_CASE("Algorithm recovers the 3x3 reference design") {
    const auto d = find_combining(kP1);
    REQUIRE(d.has_value());
    CHECK(alpha_p_is_diagonal(*d));
    const std::vector<int> expected_alpha{1, 1, -1, 1, -1, 1, -1, 1, 1};
    for (int i = 0; i < 9; ++i) CHECK(d->alpha[static_cast<std::size_t>(i)] == expected_alpha[static_cast<std::size_t>(i)]);
    CHECK(d->weights == std::vector<int>{2, 2, 2});
    for (const auto& g : d->gains) CHECK(g == Rational(4, 3));
}

TEST_CASE("Algorithm recovers the 4x4 reference design") {
    const auto d = find_combining(kP2);
    REQUIRE(d.has_value());
    CHECK(alpha_p_is_diagonal(*d));
    const std::vector<int> expected_alpha{0, -1, 1, 1, 0, 1, -1, 1, 0, 1, 1, -1, 1, 0, 0, 0};
    for (int i = 0; i < 16; ++i)
        CHECK(d->alpha[static_cast<std::size_t>(i)] == expected_alpha[static_cast<std::size_t>(i)]);
    CHECK(d->gains == std::vector<Rational>{{4, 3}, {4, 3}, {4, 3}, {1}});
}

TEST_CASE("identity factor designs trivially") {
    const auto d = find_combining(BinaryMatrix::identity(4));
    REQUIRE(d.has_value());
    for (int i = 0; i < 4; ++i) {
        CHECK(d->weights[static_cast<std::size_t>(i)] == 1);
        CHECK(d->gains[static_cast<std::size_t>(i)] == Rational(1));
        for (int j = 0; j < 4; ++j) CHECK(d->alpha_at(i, j) == (i == j ? 1 : 0));
    }
}

TEST_CASE("identical columns admit no combining matrix") {
    CHECK_FALSE(find_combining(BinaryMatrix{{1, 1}, {1, 1}}).has_value());
    CHECK(count_combining_matrices(BinaryMatrix{{1, 1}, {1, 1}}) == 0);
}

TEST_CASE("m=1 enumeration") {
    const auto designs = enumerate_square_designs(1);
    REQUIRE(designs.size() == 1);
    CHECK(designs[0].p == BinaryMatrix{{1}});
    CHECK(designs[0].gains[0] == Rational(1));
}

TEST_CASE("enumeration equals whole-matrix brute force for m = 2") {
    // All C(3,2)=3 candidates, each checked against the 3^(m*m) search.
    std::uint64_t brute_admitting = 0;
    const std::uint64_t masks[3][2] = {{1, 2}, {1, 3}, {2, 3}};
    for (const auto& mk : masks) {
        const auto p = BinaryMatrix::from_column_masks(2, std::span<const std::uint64_t>(mk, 2));
        const auto rows = brute_rows(p);
        bool all_rows = true;
        for (const auto& r : rows) all_rows = all_rows && !r.empty();
        if (all_rows) ++brute_admitting;
        std::uint64_t t = 1;
        for (const auto& r : rows) t *= r.size();
        CHECK(count_combining_matrices(p) == t);
    }
    CHECK(enumerate_square_designs(2).size() == brute_admitting);
}

TEST_CASE("row-wise search agrees with whole-matrix brute force for m = 3") {
    test::FactorGen gen(11);
    int checked = 0;
    while (checked < 10) {
        const auto p = gen.random_factor(3, 3, true);
        const auto rows = brute_rows(p);
        const auto d = find_combining(p);
        bool all_rows = true;
        for (const auto& r : rows) all_rows = all_rows && !r.empty();
        CHECK(d.has_value() == all_rows);
        if (d) {
            for (int i = 0; i < 3; ++i) {
                Rational best(0);
                for (const auto& r : rows[static_cast<std::size_t>(i)])
                    if (r.gain > best) best = r.gain;
                CHECK(d->gains[static_cast<std::size_t>(i)] == best);
            }
        }
        ++checked;
    }
}

TEST_CASE("gain formula is invariant to row scaling") {
    // gamma = w^2 / sum(a_j^2); scaling a row by c scales w by c and the
    // denominator by c^2.
    const std::vector<int> row{1, -1, 0, 1};
    const int w = 3;
    for (const int c : {2, -1}) {
        long long num = static_cast<long long>(c) * w * (static_cast<long long>(c) * w);
        long long den = 0;
        for (int v : row) den += static_cast<long long>(c) * v * (static_cast<long long>(c) * v);
        CHECK(Rational(num, den) == Rational(static_cast<long long>(w) * w, 3));
    }
}

TEST_CASE("every enumerated design satisfies the diagonal condition exactly") {
    for (int m = 2; m <= 4; ++m) {
        const auto designs = enumerate_square_designs(m);
        for (std::size_t i = 0; i < designs.size(); i += (m == 4 ? 37 : 1))
            CHECK(alpha_p_is_diagonal(designs[i]));
    }
}

TEST_CASE("uniqueness for linearly independent rows (m <= 3)") {
    for (int m = 1; m <= 3; ++m) {
        const auto designs = enumerate_square_designs(m);
        for (const auto& d : designs)
            if (rows_linearly_independent(d.p)) CHECK(count_combining_matrices(d.p) <= 1);
    }
    CHECK(count_combining_matrices(kP1) == 1);
    CHECK(count_combining_matrices(BinaryMatrix::identity(3)) == 1);
}

TEST_CASE("selection criteria") {
    const auto minmax3 = select_optimal_square(3, DesignCriterion::MaxMinGain);
    CHECK(minmax3.p == kP1);
    CHECK(minmax3.min_gain() == Rational(4, 3));

    const auto sumrate4 = select_optimal_square(4, DesignCriterion::SumRate, 1.0);
    std::multiset<std::string> gains;
    for (const auto& g : sumrate4.gains) gains.insert(g.str());
    CHECK(gains == std::multiset<std::string>{"1", "4/3", "4/3", "4/3"});

    const auto minmax4 = select_optimal_square(4, DesignCriterion::MaxMinGain);
    for (const auto& d : enumerate_square_designs(4))
        CHECK(minmax4.min_gain() >= d.min_gain());

    const auto trivial = select_optimal_square(1, DesignCriterion::MaxMinGain);
    CHECK(trivial.p == BinaryMatrix{{1}});
}

TEST_CASE("enumeration is deterministic across schedules") {
    const auto serial = enumerate_square_designs_serial(3);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
    const auto par4 = enumerate_square_designs(3);
    omp_set_num_threads(1);
    const auto par1 = enumerate_square_designs(3);
    omp_set_num_threads(saved);
    REQUIRE(serial.size() == par4.size());
    REQUIRE(serial.size() == par1.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].p == par4[i].p);
        CHECK(serial[i].alpha == par4[i].alpha);
        CHECK(serial[i].p == par1[i].p);
    }
}

TEST_CASE("enumeration cap") {
    DesignLimits limits;
    limits.enumeration_cap = 10;
    CHECK_THROWS_AS(enumerate_square_designs(4, limits), InfeasibleError);
}
