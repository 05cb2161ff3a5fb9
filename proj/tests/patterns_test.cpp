#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "kronoma/binary_matrix.hpp"
#include "kronoma/errors.hpp"
#include "kronoma/pattern.hpp"
#include "kronoma/search_space.hpp"
#include "test_support.hpp"

using namespace kronoma;

namespace {

const BinaryMatrix kP1{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
const BinaryMatrix kP2{{0, 0, 0, 1}, {0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 0}};
const BinaryMatrix kF23{{1, 0, 1}, {1, 1, 0}};

std::set<int> row_support(const BinaryMatrix& g, int r) {
    std::set<int> s;
    for (int c = 0; c < g.cols(); ++c)
        if (g.at(r, c)) s.insert(c + 1);
    return s;
}

}  // namespace

TEST_CASE("kronecker product blocks") {
    const BinaryMatrix a{{1, 1}};
    const BinaryMatrix out = kronecker(a, kF23);
    CHECK(out == BinaryMatrix{{1, 0, 1, 1, 0, 1}, {1, 1, 0, 1, 1, 0}});
}

TEST_CASE("kronecker identity and dims") {
    const BinaryMatrix a{{1, 0}, {1, 1}};
    CHECK(kronecker(a, BinaryMatrix{{1}}) == a);
    const BinaryMatrix b(2, 3), c(3, 3);
    const auto d = kronecker(b, c);
    CHECK(d.rows() == 6);
    CHECK(d.cols() == 9);
}

TEST_CASE("kronecker size cap") {
    const BinaryMatrix big(64, 64);
    CHECK_THROWS_AS(kronecker(big, big, 1 << 20), InfeasibleError);
}

TEST_CASE("expand reproduces Example 1 row supports") {
    const auto p = KroneckerPattern::build({}, {kP1, kP2});
    const BinaryMatrix g = p.expand();
    REQUIRE(g.rows() == 12);
    REQUIRE(g.cols() == 12);
    CHECK(row_support(g, 0) == std::set<int>{4, 8});
    CHECK(row_support(g, 1) == std::set<int>{2, 3, 6, 7});
    CHECK(row_support(g, 2) == std::set<int>{1, 3, 5, 7});
    CHECK(row_support(g, 3) == std::set<int>{1, 2, 5, 6});
}

TEST_CASE("single factor expands to itself") {
    const auto p = KroneckerPattern::build({}, {kP1});
    CHECK(p.expand() == kP1);
}

TEST_CASE("three-factor rectangular pattern dims and beta") {
    const BinaryMatrix f1{{1, 1}};
    const auto p = KroneckerPattern::build({f1, kF23, kF23}, {});
    const BinaryMatrix g = p.expand();
    CHECK(g.rows() == 4);
    CHECK(g.cols() == 18);
    CHECK(p.overload_factor() == Rational(9, 2));
}

TEST_CASE("validate_factor reports offending columns") {
    CHECK(validate_factor(kP1).valid);
    const auto dup = validate_factor(BinaryMatrix{{1, 1}, {1, 1}});
    CHECK_FALSE(dup.valid);
    REQUIRE(dup.duplicate_columns.size() == 1);
    CHECK(dup.duplicate_columns[0] == std::pair<int, int>{1, 2});
    const auto zero = validate_factor(BinaryMatrix{{0}, {0}});
    CHECK_FALSE(zero.valid);
    CHECK(zero.zero_columns == std::vector<int>{1});
}

TEST_CASE("search space sizes") {
    CHECK(factorized_search_space(std::vector<std::pair<int, int>>{{2, 3}, {3, 3}}) == 35);
    CHECK(search_space_size(6, 9) == BigInt("23667689815"));
    CHECK(search_space_size(1, 1) == 1);
    CHECK_THROWS_AS(search_space_size(2, 4), InfeasibleError);
}

TEST_CASE("search space equals brute-force enumeration for m,k <= 3") {
    for (int m = 1; m <= 3; ++m) {
        const int top = (1 << m) - 1;
        for (int k = 1; k <= std::min(3, top); ++k) {
            // Count k-subsets of nonzero masks directly.
            std::uint64_t count = 0;
            std::vector<int> pick(static_cast<std::size_t>(k));
            auto rec = [&](auto&& self, int pos, int lo) -> void {
                if (pos == k) {
                    ++count;
                    return;
                }
                for (int v = lo; v <= top; ++v) {
                    pick[static_cast<std::size_t>(pos)] = v;
                    self(self, pos + 1, v + 1);
                }
            };
            rec(rec, 0, 1);
            CHECK(search_space_size(m, k) == count);
        }
    }
}

TEST_CASE("kronecker associates under expand") {
    test::FactorGen gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = gen.random_factor(2, 2, false);
        const auto b = gen.random_factor(1 + (gen.next_u32() % 2), 3, false);
        const auto c = gen.random_factor(2, 1 + (gen.next_u32() % 3), false);
        CHECK(kronecker_chain(std::vector<BinaryMatrix>{a, b, c}) ==
              kronecker(kronecker(a, b), c));
    }
}

TEST_CASE("column distinctness propagates through the product") {
    // Exhaustive over 2x2 and 2x3 factor pairs.
    auto all_factors = [](int rows, int cols) {
        std::vector<BinaryMatrix> out;
        const int cells = rows * cols;
        for (int bits = 0; bits < (1 << cells); ++bits) {
            BinaryMatrix m(rows, cols);
            for (int i = 0; i < cells; ++i)
                m.set(i / cols, i % cols, static_cast<std::uint8_t>((bits >> i) & 1));
            out.push_back(m);
        }
        return out;
    };
    for (const auto& a : all_factors(2, 2))
        for (const auto& b : all_factors(2, 3)) {
            const bool factors_ok = validate_factor(a).valid && validate_factor(b).valid;
            const bool product_ok = validate_factor(kronecker(a, b)).valid;
            CHECK(product_ok == factors_ok);
        }
}

TEST_CASE("pattern json round trip") {
    const auto p = pattern_from_json(R"({"rect":[[[1,1,0],[1,0,1]]],"square":[[[1,1,0],[1,0,1],[0,1,1]]]})");
    CHECK(p.rect_rows() == 2);
    CHECK(p.total_cols() == 9);
    const auto p2 = pattern_from_json(pattern_to_json(p));
    CHECK(p2.expand() == p.expand());
}

TEST_CASE("pattern build rejects zero columns but allows wide duplicates") {
    CHECK_NOTHROW(KroneckerPattern::build({BinaryMatrix{{1, 1}}}, {}));
    CHECK_THROWS_AS(KroneckerPattern::build({BinaryMatrix{{1, 0, 1}, {1, 0, 0}}}, {}),
                    ConfigError);
    CHECK_THROWS_AS(KroneckerPattern::build({}, {BinaryMatrix{{1, 1}, {1, 1}}}),
                    InfeasibleError);
}
