#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "kronoma/errors.hpp"
#include "kronoma/pattern.hpp"
#include "kronoma/rng.hpp"
#include "kronoma/sq_detect.hpp"
#include "test_support.hpp"

using namespace kronoma;

namespace {

const BinaryMatrix kP1{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
const BinaryMatrix kP2{{0, 0, 0, 1}, {0, 1, 1, 0}, {1, 0, 1, 0}, {1, 1, 0, 0}};

std::vector<SquareFactorDesign> example1_designs() {
    return {*find_combining(kP1), *find_combining(kP2)};
}

std::vector<double> matvec(const BinaryMatrix& g, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(g.rows()), 0.0);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (g.at(r, c)) y[static_cast<std::size_t>(r)] += x[static_cast<std::size_t>(c)];
    return y;
}

}  // namespace

TEST_CASE("noiseless unit impulse produces the scaled singleton") {
    const auto designs = example1_designs();
    const auto g = KroneckerPattern::build({}, {kP1, kP2}).expand();
    std::vector<double> x(12, 0.0);
    x[0] = 1.0;
    const auto det = detect_square(matvec(g, x), designs);
    CHECK(det.values[0] == doctest::Approx(4.0).epsilon(0));
    CHECK(det.scales[0] == 4);
}

TEST_CASE("identity design passes the input through") {
    const std::vector<SquareFactorDesign> designs{*find_combining(BinaryMatrix::identity(3))};
    const std::vector<double> y{0.5, -1.25, 2.0};
    const auto det = detect_square(y, designs);
    CHECK(det.values == y);
    for (const auto& g : gain_tree(designs)) CHECK(g == Rational(1));
}

TEST_CASE("linearity: singleton scales recover every BPSK input exactly") {
    // 2x2 (x) 2x2 pattern, exhaustive over 16 inputs; integer arithmetic in
    // doubles is exact at these magnitudes.
    const BinaryMatrix q{{1, 0}, {1, 1}};
    const auto d = find_combining(q);
    REQUIRE(d.has_value());
    const std::vector<SquareFactorDesign> designs{*d, *d};
    const auto pattern = KroneckerPattern::build({}, {q, q});
    const auto g = pattern.expand();
    const auto scales = scale_table(designs);
    for (int bits = 0; bits < 16; ++bits) {
        std::vector<double> x(4);
        for (int i = 0; i < 4; ++i) x[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1.0 : -1.0;
        const auto det = detect_square(matvec(g, x), designs);
        for (int i = 0; i < 4; ++i)
            CHECK(det.values[static_cast<std::size_t>(i)] ==
                  static_cast<double>(scales[static_cast<std::size_t>(i)]) * x[static_cast<std::size_t>(i)]);
    }
    // Random real inputs, same exactness on the scale bookkeeping.
    test::FactorGen gen(3);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> x(4);
        for (auto& v : x) v = gen.gaussian();
        const auto det = detect_square(matvec(g, x), designs);
        for (int i = 0; i < 4; ++i)
            CHECK(det.values[static_cast<std::size_t>(i)] ==
                  doctest::Approx(static_cast<double>(scales[static_cast<std::size_t>(i)]) *
                                  x[static_cast<std::size_t>(i)])
                      .epsilon(1e-12));
    }
}

TEST_CASE("pure-noise variance factor matches the bookkeeping") {
    const auto designs = example1_designs();
    const auto nvf = noise_variance_factor_table(designs);
    CHECK(nvf[0] == Rational(9));  // two three-term combines
    TrialRng rng(17, 0, 0);
    const int trials = 100000;
    double sum = 0, sum2 = 0;
    std::vector<double> y(12);
    for (int t = 0; t < trials; ++t) {
        for (auto& v : y) v = rng.gaussian();
        const auto det = detect_square(y, designs);
        sum += det.values[0];
        sum2 += det.values[0] * det.values[0];
    }
    const double var = sum2 / trials - (sum / trials) * (sum / trials);
    CHECK(var == doctest::Approx(9.0).epsilon(0.03));
}

TEST_CASE("gain digits and overall gain reproduce the reference values") {
    const auto designs = example1_designs();
    CHECK(symbol_digits(8, designs) == std::vector<int>{2, 4});
    CHECK(overall_gain(8, designs) == Rational(4, 3));
    for (const long long i : {4LL, 8LL, 12LL}) CHECK(overall_gain(i, designs) == Rational(4, 3));
    for (long long i = 1; i <= 12; ++i)
        if (i != 4 && i != 8 && i != 12) CHECK(overall_gain(i, designs) == Rational(16, 9));
    CHECK_THROWS_AS(overall_gain(13, designs), ConfigError);
}

TEST_CASE("gain tree equals pointwise overall gains") {
    const auto designs = example1_designs();
    const auto tree = gain_tree(designs);
    std::map<std::string, int> multiset;
    for (long long i = 1; i <= 12; ++i) {
        CHECK(tree[static_cast<std::size_t>(i - 1)] == overall_gain(i, designs));
        multiset[tree[static_cast<std::size_t>(i - 1)].str()]++;
    }
    CHECK(multiset["4/3"] == 3);
    CHECK(multiset["16/9"] == 9);

    // Three random designs, both code paths pointwise equal.
    test::FactorGen gen(5);
    std::vector<SquareFactorDesign> random_designs;
    while (random_designs.size() < 3) {
        const auto q = gen.random_factor(2, 2, true);
        if (auto d = find_combining(q)) random_designs.push_back(std::move(*d));
    }
    const auto t2 = gain_tree(random_designs);
    for (long long i = 1; i <= 8; ++i)
        CHECK(t2[static_cast<std::size_t>(i - 1)] == overall_gain(i, random_designs));
}

TEST_CASE("gain consistency: scale^2 / variance factor") {
    const auto designs = example1_designs();
    const auto scales = scale_table(designs);
    const auto nvf = noise_variance_factor_table(designs);
    for (long long i = 1; i <= 12; ++i) {
        const auto& w = scales[static_cast<std::size_t>(i - 1)];
        CHECK(Rational(w * w) / nvf[static_cast<std::size_t>(i - 1)] == overall_gain(i, designs));
    }
}

TEST_CASE("instrumented adds hit the dense bound exactly") {
    const auto designs = example1_designs();
    std::vector<double> y(12, 0.0);
    const auto det = detect_square(y, designs);
    CHECK(det.adds_per_recursion == std::vector<std::uint64_t>{36, 24});
    CHECK(det.total_adds() == 60);  // M * sum(m_l - 1)
}

TEST_CASE("noise correlation structure of the singleton outputs") {
    // Outputs sharing a final group are correlated (alpha alpha^T is not
    // diagonal); outputs with disjoint RE support are independent.  The
    // covariance must match sigma^2 * (a1 a1^T) kron (a2 a2^T).
    const auto designs = example1_designs();
    std::vector<std::vector<double>> alpha_gram(2);
    for (int l = 0; l < 2; ++l) {
        const auto& d = designs[static_cast<std::size_t>(l)];
        const int m = d.dim();
        alpha_gram[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(m) * m, 0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                int acc = 0;
                for (int t = 0; t < m; ++t) acc += d.alpha_at(i, t) * d.alpha_at(j, t);
                alpha_gram[static_cast<std::size_t>(l)][static_cast<std::size_t>(i) * m + j] = acc;
            }
    }
    auto analytic_cov = [&](int i, int j) {
        return alpha_gram[0][static_cast<std::size_t>(i / 4) * 3 + j / 4] *
               alpha_gram[1][static_cast<std::size_t>(i % 4) * 4 + j % 4];
    };
    const int trials = 200000;
    TrialRng rng(23, 1, 0);
    std::vector<double> y(12);
    std::vector<double> mean(12, 0.0), cov(144, 0.0);
    for (int t = 0; t < trials; ++t) {
        for (auto& v : y) v = rng.gaussian();
        const auto det = detect_square(y, designs);
        for (int i = 0; i < 12; ++i) {
            mean[static_cast<std::size_t>(i)] += det.values[static_cast<std::size_t>(i)];
            for (int j = 0; j < 12; ++j)
                cov[static_cast<std::size_t>(i) * 12 + j] +=
                    det.values[static_cast<std::size_t>(i)] * det.values[static_cast<std::size_t>(j)];
        }
    }
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double c = cov[static_cast<std::size_t>(i) * 12 + j] / trials -
                             (mean[static_cast<std::size_t>(i)] / trials) *
                                 (mean[static_cast<std::size_t>(j)] / trials);
            CHECK(std::abs(c - analytic_cov(i, j)) < 0.2);
            if (i != j && analytic_cov(i, j) == 0) {
                const double denom = std::sqrt(analytic_cov(i, i) * analytic_cov(j, j));
                CHECK(std::abs(c / denom) < 0.02);
            }
        }
}

TEST_CASE("dimension mismatch is rejected") {
    const auto designs = example1_designs();
    std::vector<double> y(11, 0.0);
    CHECK_THROWS_AS(detect_square(y, designs), ConfigError);
}
