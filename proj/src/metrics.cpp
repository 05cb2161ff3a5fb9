#include "kronoma/metrics.hpp"

#include <cmath>

#include "kronoma/errors.hpp"
#include "kronoma/sq_detect.hpp"

namespace kronoma {

namespace {

// log2 det(I + c * FF^T) via Cholesky; FF^T passed as a dense symmetric
// matrix (desk-scale dimensions, no sparsity worth exploiting).
double logdet2_shifted(const std::vector<double>& fft, int n, double c) {
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>(i) * n + j] =
                (i == j ? 1.0 : 0.0) + c * fft[static_cast<std::size_t>(i) * n + j];
    double logdet = 0;
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            const double l = a[static_cast<std::size_t>(j) * n + k];
            d -= l * l;
        }
        if (d <= 0) throw ConfigError("logdet: matrix not positive definite");
        const double root = std::sqrt(d);
        a[static_cast<std::size_t>(j) * n + j] = root;
        logdet += 2.0 * std::log2(root);
        for (int i = j + 1; i < n; ++i) {
            double v = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                v -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
            a[static_cast<std::size_t>(i) * n + j] = v / root;
        }
    }
    return logdet;
}

std::vector<double> gram(const BinaryMatrix& f) {
    const int m = f.rows(), k = f.cols();
    std::vector<double> fft(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            int acc = 0;
            for (int c = 0; c < k; ++c) acc += f.at(i, c) * f.at(j, c);
            fft[static_cast<std::size_t>(i) * m + j] = acc;
        }
    return fft;
}

double pairwise_sum(std::span<const double> terms) {
    if (terms.empty()) return 0;
    if (terms.size() == 1) return terms[0];
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

double rate_over_paths(const BinaryMatrix& f, std::span<const Rational> path_gains, double rho,
                       long long total_res) {
    const auto fft = gram(f);
    std::vector<double> terms;
    terms.reserve(path_gains.size());
    for (const auto& g : path_gains)
        terms.push_back(logdet2_shifted(fft, f.rows(), rho * g.to_double()));
    return pairwise_sum(terms) / (2.0 * static_cast<double>(total_res));
}

}  // namespace

double sum_rate_general(const KroneckerPattern& pattern, double rho) {
    if (rho < 0) throw ConfigError("sum rate: rho must be nonnegative");
    const auto gains = gain_tree(pattern.square_designs());
    return rate_over_paths(pattern.rect_expand(), gains, rho, pattern.total_rows());
}

double sum_rate_with_gains(const KroneckerPattern& pattern, double rho,
                           std::span<const Rational> revised_gains) {
    if (rho < 0) throw ConfigError("sum rate: rho must be nonnegative");
    if (static_cast<long long>(revised_gains.size()) != pattern.square_size())
        throw ConfigError("sum rate: revised gain table needs one entry per square path");
    return rate_over_paths(pattern.rect_expand(), revised_gains, rho, pattern.total_rows());
}

double sum_rate_identical(const BinaryMatrix& rect_expanded, const SquareFactorDesign& design,
                          int l_s, double rho) {
    if (rho < 0) throw ConfigError("sum rate: rho must be nonnegative");
    if (l_s < 0) throw ConfigError("sum rate: l_s must be nonnegative");
    const int mp = design.dim();
    const auto fft = gram(rect_expanded);
    long long m_total = rect_expanded.rows();
    for (int i = 0; i < l_s; ++i) m_total *= mp;

    // Exponent tuples (r_1..r_mp) with sum l_s, weighted by the exact
    // multinomial coefficient.
    std::vector<double> terms;
    std::vector<int> r(static_cast<std::size_t>(mp), 0);
    auto recurse = [&](auto&& self, int pos, int left) -> void {
        if (pos == mp - 1) {
            r[static_cast<std::size_t>(pos)] = left;
            BigInt coeff = 1;
            int used = 0;
            for (int i = 0; i < mp; ++i) {
                for (int t = 1; t <= r[static_cast<std::size_t>(i)]; ++t) {
                    coeff *= ++used;
                    coeff /= t;
                }
            }
            Rational gain(1);
            for (int i = 0; i < mp; ++i)
                for (int t = 0; t < r[static_cast<std::size_t>(i)]; ++t)
                    gain = gain * design.gains[static_cast<std::size_t>(i)];
            terms.push_back(coeff.convert_to<double>() *
                            logdet2_shifted(fft, rect_expanded.rows(), rho * gain.to_double()));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            r[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (l_s == 0)
        terms.push_back(logdet2_shifted(fft, rect_expanded.rows(), rho));
    else
        recurse(recurse, 0, l_s);
    return pairwise_sum(terms) / (2.0 * static_cast<double>(m_total));
}

double pdma_capacity(const BinaryMatrix& a, double rho) {
    if (rho < 0) throw ConfigError("pdma_capacity: rho must be nonnegative");
    return logdet2_shifted(gram(a), a.rows(), rho) / (2.0 * a.rows());
}

CostModel CostModel::brute_force_map() {
    CostModel c;
    auto candidates = [](const BinaryMatrix& f, std::size_t space) {
        double n = 1;
        for (int j = 0; j < f.cols(); ++j) n *= static_cast<double>(space);
        return n;
    };
    auto candidates_u = [](const BinaryMatrix& f, std::size_t space) {
        std::uint64_t n = 1;
        for (int j = 0; j < f.cols(); ++j) n *= space;
        return n;
    };
    // Residual evaluation of one candidate: (row weight - 1) adds per row to
    // form Fz, one subtraction per row, m-1 adds to accumulate the norm, and
    // one squaring mul per row.
    auto adds_per_candidate = [](const BinaryMatrix& f) {
        std::uint64_t n = 0;
        for (int r = 0; r < f.rows(); ++r) {
            const int w = f.row_weight(r);
            n += static_cast<std::uint64_t>(w > 0 ? w - 1 : 0) + 1;
        }
        return n + static_cast<std::uint64_t>(f.rows() - 1);
    };
    c.t_mud_noisy = candidates;
    c.t_mud_noiseless = candidates;
    c.adds_mud_noisy = [=](const BinaryMatrix& f, std::size_t s) {
        return candidates_u(f, s) * adds_per_candidate(f);
    };
    c.adds_mud_noiseless = c.adds_mud_noisy;
    c.muls_mud_noisy = [=](const BinaryMatrix& f, std::size_t s) {
        return candidates_u(f, s) * static_cast<std::uint64_t>(f.rows());
    };
    c.muls_mud_noiseless = c.muls_mud_noisy;
    return c;
}

namespace {

// One rectangular recursion in the worst-case accounting: recursion lp
// (1-based, lp = 1 noisy) solves `systems` copies of factor L_r-lp+1 over the
// sumset alphabet of order K_{L_r-lp}.
struct RectStage {
    const BinaryMatrix* factor;
    std::uint64_t systems;
    std::size_t space;
    bool noisy;
};

std::vector<RectStage> rect_stages(const KroneckerPattern& pattern, const Constellation& base) {
    const auto& factors = pattern.rect_factors();
    const int lr = static_cast<int>(factors.size());
    std::vector<RectStage> stages;
    if (lr == 0) return stages;
    std::vector<long long> k_prefix(static_cast<std::size_t>(lr) + 1, 1);
    std::vector<long long> m_prefix(static_cast<std::size_t>(lr) + 1, 1);
    for (int l = 1; l <= lr; ++l) {
        k_prefix[static_cast<std::size_t>(l)] =
            k_prefix[static_cast<std::size_t>(l - 1)] * factors[static_cast<std::size_t>(l - 1)].cols();
        m_prefix[static_cast<std::size_t>(l)] =
            m_prefix[static_cast<std::size_t>(l - 1)] * factors[static_cast<std::size_t>(l - 1)].rows();
    }
    std::uint64_t kappa = 1;  // product of k's of already-processed factors
    for (int lp = 1; lp <= lr; ++lp) {
        const int fl = lr - lp;  // 0-based factor index
        const long long order = k_prefix[static_cast<std::size_t>(fl)];
        RectStage st;
        st.factor = &factors[static_cast<std::size_t>(fl)];
        st.systems = kappa * static_cast<std::uint64_t>(m_prefix[static_cast<std::size_t>(fl)]);
        st.space = order == 1 ? base.size()
                              : sumset_cardinality(base.points, static_cast<int>(order));
        st.noisy = lp == 1;
        stages.push_back(st);
        kappa *= static_cast<std::uint64_t>(factors[static_cast<std::size_t>(fl)].cols());
    }
    return stages;
}

double combining_latency_units(const KroneckerPattern& pattern) {
    double units = 0;
    for (const auto& d : pattern.square_designs()) units += d.dim() - 1;
    return units;
}

}  // namespace

double latency_worst_case(const KroneckerPattern& pattern, const Constellation& base,
                          const CostModel& cost) {
    double t = cost.t_add * combining_latency_units(pattern);
    for (const auto& st : rect_stages(pattern, base)) {
        const auto& f = st.noisy ? cost.t_mud_noisy : cost.t_mud_noiseless;
        t += f(*st.factor, st.space);  // one solve per recursion; systems run in parallel
    }
    return t;
}

OpCounts op_counts(const KroneckerPattern& pattern, const Constellation& base,
                   const CostModel& cost) {
    OpCounts out;
    long long combine_adds = 0;
    for (const auto& d : pattern.square_designs()) combine_adds += d.dim() - 1;
    out.adds = static_cast<std::uint64_t>(pattern.total_rows()) *
               static_cast<std::uint64_t>(combine_adds);
    const std::uint64_t m_s = static_cast<std::uint64_t>(pattern.square_size());
    for (const auto& st : rect_stages(pattern, base)) {
        const auto& fa = st.noisy ? cost.adds_mud_noisy : cost.adds_mud_noiseless;
        const auto& fm = st.noisy ? cost.muls_mud_noisy : cost.muls_mud_noiseless;
        out.adds += m_s * st.systems * fa(*st.factor, st.space);
        out.muls += m_s * st.systems * fm(*st.factor, st.space);
    }
    return out;
}

SearchSpaceCounts map_search_space(const KroneckerPattern& pattern, const Constellation& base) {
    if (!pattern.pure_rect())
        throw ConfigError("map_search_space: defined for rectangular-only patterns");
    SearchSpaceCounts out;
    out.recursive = 0;
    for (const auto& st : rect_stages(pattern, base)) {
        BigInt per_solve = 1;
        for (int j = 0; j < st.factor->cols(); ++j) per_solve *= st.space;
        out.recursive += BigInt(st.systems) * per_solve;
    }
    out.direct = 1;
    for (long long u = 0; u < pattern.total_cols(); ++u) out.direct *= base.size();
    return out;
}

std::vector<Table1Row> table1_estimates(const KroneckerPattern& pattern,
                                        const Table1Params& params) {
    const double m = static_cast<double>(pattern.total_rows());
    const double k = static_cast<double>(pattern.total_cols());
    const double m_s = static_cast<double>(pattern.square_size());
    const double c0 = params.c0;
    const double d_f =
        params.d_f > 0 ? params.d_f : static_cast<double>(pattern.rect_expand().max_row_weight());
    const double d_g =
        params.d_g > 0 ? params.d_g : static_cast<double>(pattern.expand().max_row_weight());
    const double lg = std::log2(c0);
    const double bp_g = params.t_in * d_g * m * k * std::pow(c0, d_g) * lg;
    const double bp_f = params.t_in * d_f * m * k * std::pow(c0, d_f) * lg / m_s;
    std::vector<Table1Row> rows;
    rows.push_back({"sic_over_g", k * k * m * m * m, k * k * m * m * m});
    rows.push_back({"ours_sic_over_f", m + k * k * m * m * m / std::pow(m_s, 4),
                    k * k * m * m * m / std::pow(m_s, 4)});
    rows.push_back({"bp_over_g", bp_g, d_g * m * k * std::pow(c0, d_g)});
    rows.push_back({"ours_bp_over_f", m + bp_f, d_f * m * k * std::pow(c0, d_f) / m_s});
    rows.push_back({"bp_idd_over_g", params.t_out * bp_g, d_g * m * k * std::pow(c0, d_g)});
    rows.push_back({"ours_bp_idd_over_f", m + params.t_out * bp_f,
                    d_f * m * k * std::pow(c0, d_f) / m_s});
    return rows;
}

}  // namespace kronoma
