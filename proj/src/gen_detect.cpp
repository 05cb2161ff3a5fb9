#include "kronoma/gen_detect.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kronoma/errors.hpp"
#include "kronoma/sq_detect.hpp"

namespace kronoma {

namespace {

void merge_status(GeneralDetection& out, DetectStatus s, const std::string& where) {
    if (s == DetectStatus::Ok) return;
    if (out.status == DetectStatus::Infeasible) return;
    if (out.status == DetectStatus::Ok || s == DetectStatus::Infeasible) {
        out.status = s;
        out.failure = where;
    }
}

GeneralDetection detect_pure_square(std::span<const double> y, const KroneckerPattern& pattern,
                                    const Constellation& base,
                                    std::span<const double> user_scales) {
    const auto& designs = pattern.square_designs();
    SquareDetection det = detect_square(y, designs);
    GeneralDetection out;
    out.combine_adds = det.total_adds();
    out.path_gains = gain_tree(designs);
    const std::size_t n = det.values.size();
    out.symbols.resize(n);
    out.point_indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double scale = static_cast<double>(det.scales[i]);
        if (!user_scales.empty()) scale *= user_scales[i];
        const int idx = base.nearest_real(det.values[i], scale);
        out.point_indices[i] = idx;
        out.symbols[i] = base.points[idx].real();
    }
    return out;
}

GeneralDetection wrap_rect(RectDetection&& rect) {
    GeneralDetection out;
    out.status = rect.status;
    out.failure = rect.failure;
    out.symbols = std::move(rect.symbols);
    out.point_indices = std::move(rect.point_indices);
    out.path_gains = {Rational(1)};
    out.mud_candidates = rect.mud_candidates;
    return out;
}

}  // namespace

GeneralDetection detect_general(std::span<const double> y, const KroneckerPattern& pattern,
                                const Constellation& base, double noise_variance,
                                const DetectOptions& opts,
                                std::span<const double> user_scales) {
    if (static_cast<long long>(y.size()) != pattern.total_rows())
        throw ConfigError("detect_general: signal length does not match the pattern");
    if (!user_scales.empty() &&
        static_cast<long long>(user_scales.size()) != pattern.total_cols())
        throw ConfigError("detect_general: user scale count does not match the pattern");
    if (pattern.pure_rect())
        return wrap_rect(
            detect_rect(y, pattern.rect_factors(), base, noise_variance, opts, user_scales));
    if (pattern.pure_square()) return detect_pure_square(y, pattern, base, user_scales);

    const auto& designs = pattern.square_designs();
    const long long m_r = pattern.rect_rows();
    const long long k_r = pattern.rect_cols();
    const long long m_s = pattern.square_size();

    GeneralDetection out;
    out.symbols.assign(static_cast<std::size_t>(pattern.total_cols()), 0.0);
    out.point_indices.assign(static_cast<std::size_t>(pattern.total_cols()), 0);

    // Phase I: square combining, one contiguous block per rectangular row.
    std::vector<double> combined(y.begin(), y.end());
    std::vector<std::uint64_t> adds(designs.size(), 0);
    for (long long b = 0; b < m_r; ++b) {
        combine_square_inplace(
            std::span<double>(combined).subspan(static_cast<std::size_t>(b * m_s),
                                                static_cast<std::size_t>(m_s)),
            designs, adds);
        for (auto a : adds) out.combine_adds += a;
    }
    const auto scales = scale_table(designs);
    out.path_gains = gain_tree(designs);

    // Phase II: one rectangular detection per square path tau' = s+1, over the
    // weight-normalized observations with noise variance sigma^2 / gain.
    std::vector<double> ytilde(static_cast<std::size_t>(m_r));
    for (long long s = 0; s < m_s; ++s) {
        for (long long t = 0; t < m_r; ++t)
            ytilde[static_cast<std::size_t>(t)] =
                combined[static_cast<std::size_t>(t * m_s + s)] / static_cast<double>(scales[s]);
        const double sigma2_eff =
            noise_variance / out.path_gains[static_cast<std::size_t>(s)].to_double();
        std::vector<double> sg_scales;
        if (!user_scales.empty()) {
            sg_scales.resize(static_cast<std::size_t>(k_r));
            for (long long t = 0; t < k_r; ++t)
                sg_scales[static_cast<std::size_t>(t)] = user_scales[static_cast<std::size_t>(t * m_s + s)];
        }
        RectDetection rect =
            detect_rect(ytilde, pattern.rect_factors(), base, sigma2_eff, opts, sg_scales);
        out.mud_candidates += rect.mud_candidates;
        merge_status(out, rect.status,
                     "super-group tau'=" + std::to_string(s + 1) + ": " + rect.failure);
        if (rect.status == DetectStatus::Infeasible && !opts.fallback_nearest) return out;
        for (long long t = 0; t < k_r; ++t) {
            const std::size_t global = static_cast<std::size_t>(t * m_s + s);
            out.symbols[global] = rect.symbols[static_cast<std::size_t>(t)];
            out.point_indices[global] = rect.point_indices[static_cast<std::size_t>(t)];
        }
    }
    return out;
}

namespace {

struct ReformAnalysis {
    std::vector<int> alpha;          // signed combining over the m1 group inputs
    std::vector<long long> coeff;    // c_i = sum_j alpha_j p(j,i) per column
    long long c_target = 0;
    int nnz = 0;
    Rational row_gain;  // c_target^2 / nnz
};

ReformAnalysis analyze_reform(const SquareFactorDesign& d, const SicReform& r,
                              const std::set<int>& decided) {
    const int m = d.dim();
    if (r.target < 1 || r.target > m)
        throw ConfigError("sic policy: reform target row " + std::to_string(r.target) +
                          " does not exist");
    if (decided.count(r.target))
        throw ConfigError("sic policy: reform target row " + std::to_string(r.target) +
                          " was already decided");
    ReformAnalysis a;
    a.alpha.assign(m, 0);
    if (r.from.empty()) throw ConfigError("sic policy: reform needs at least one input");
    for (int j : r.from) {
        const int row = j < 0 ? -j : j;
        if (row < 1 || row > m)
            throw ConfigError("sic policy: reform input " + std::to_string(row) +
                              " does not exist");
        if (a.alpha[row - 1] != 0)
            throw ConfigError("sic policy: reform input " + std::to_string(row) +
                              " listed twice");
        a.alpha[row - 1] = j < 0 ? -1 : 1;
        ++a.nnz;
    }
    a.coeff.assign(m, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a.coeff[i] += a.alpha[j] * d.p.at(j, i);
    a.c_target = a.coeff[r.target - 1];
    if (a.c_target == 0)
        throw ConfigError("sic policy: reform combination cancels its own target row");
    for (int i = 1; i <= m; ++i) {
        if (i == r.target || a.coeff[i - 1] == 0) continue;
        if (std::find(r.subtract.begin(), r.subtract.end(), i) == r.subtract.end())
            throw ConfigError("sic policy: reform leaves row " + std::to_string(i) +
                              " uncancelled and undecided");
        if (!decided.count(i))
            throw ConfigError("sic policy: reform subtracts row " + std::to_string(i) +
                              " before any step decided it");
    }
    a.row_gain = Rational(a.c_target * a.c_target, a.nnz);
    return a;
}

}  // namespace

std::vector<Rational> sic_revised_gains(const KroneckerPattern& pattern,
                                        const SicPolicy& policy) {
    if (pattern.square_designs().empty())
        throw ConfigError("sic policy: pattern has no square factors");
    const auto& designs = pattern.square_designs();
    const auto& d1 = designs.front();
    std::vector<Rational> row_gains = d1.gains;
    std::set<int> decided;
    for (const auto& step : policy.steps) {
        for (int c : step.detect) {
            if (c < 1 || c > d1.dim())
                throw ConfigError("sic policy: detect row " + std::to_string(c) +
                                  " does not exist");
            decided.insert(c);
        }
        for (const auto& r : step.reforms) {
            const ReformAnalysis a = analyze_reform(d1, r, decided);
            row_gains[r.target - 1] = a.row_gain;
            decided.insert(r.target);
        }
    }
    const auto tail =
        std::span<const SquareFactorDesign>(designs).subspan(1);
    const auto tail_gains = gain_tree(tail);
    std::vector<Rational> out;
    out.reserve(static_cast<std::size_t>(pattern.square_size()));
    for (int c = 0; c < d1.dim(); ++c)
        for (const auto& gt : tail_gains) out.push_back(row_gains[c] * gt);
    return out;
}

GeneralDetection detect_with_sic(std::span<const double> y, const KroneckerPattern& pattern,
                                 const Constellation& base, double noise_variance,
                                 const SicPolicy& policy, SicMode mode,
                                 std::span<const double> true_symbols,
                                 const DetectOptions& opts) {
    if (policy.empty()) return detect_general(y, pattern, base, noise_variance, opts);
    if (pattern.square_designs().empty())
        throw ConfigError("detect_with_sic: pattern has no square factors");
    if (static_cast<long long>(y.size()) != pattern.total_rows())
        throw ConfigError("detect_with_sic: signal length does not match the pattern");
    if (mode == SicMode::Genie &&
        static_cast<long long>(true_symbols.size()) != pattern.total_cols())
        throw ConfigError("detect_with_sic: genie mode needs the true symbol vector");

    const auto& designs = pattern.square_designs();
    const auto& d1 = designs.front();
    const int m1 = d1.dim();
    const long long m_r = pattern.rect_rows();
    const long long k_r = pattern.rect_cols();
    const long long m_s = pattern.square_size();
    const long long tail_n = m_s / m1;
    const auto tail = std::span<const SquareFactorDesign>(designs).subspan(1);
    const auto tail_scales = scale_table(tail);
    const auto tail_gains = gain_tree(tail);

    GeneralDetection out;
    out.symbols.assign(static_cast<std::size_t>(pattern.total_cols()), 0.0);
    out.point_indices.assign(static_cast<std::size_t>(pattern.total_cols()), 0);
    out.path_gains = sic_revised_gains(pattern, policy);  // also validates the policy

    // Phase I, all square recursions except the final one (axis 0).
    std::vector<double> combined(y.begin(), y.end());
    std::vector<std::uint64_t> adds(tail.size(), 0);
    for (long long b = 0; b < m_r; ++b) {
        combine_square_suffix(
            std::span<double>(combined).subspan(static_cast<std::size_t>(b * m_s),
                                                static_cast<std::size_t>(m_s)),
            designs, 1, adds);
        for (auto a : adds) out.combine_adds += a;
    }
    // Final-recursion input v(b, j, t) = combined[b*M_s + j*tail_n + t].
    auto input = [&](long long b, int j, long long t) -> double {
        return combined[static_cast<std::size_t>(b * m_s + j * tail_n + t)];
    };
    auto global_index = [&](long long user_t, int c, long long t) {
        // User user_t (0-based within the super-group) of square path (c, t).
        return static_cast<std::size_t>(user_t * m_s + static_cast<long long>(c - 1) * tail_n + t);
    };

    // Decide the super-group of square-path (c,t) from its per-block values
    // `vals`, each equal to scale * (F x_sub)_b + noise of variance
    // sigma^2 * noise_factor.  Stores decisions in user order.
    std::vector<std::vector<std::vector<double>>> decided_f(
        static_cast<std::size_t>(m1 + 1));  // [c][t] -> F * decided symbols, per block
    for (auto& per_c : decided_f)
        per_c.resize(static_cast<std::size_t>(tail_n));
    std::set<int> decided_cols;
    const BinaryMatrix f_rect = pattern.pure_square() ? BinaryMatrix{{1}} : pattern.rect_expand();

    auto decide_group = [&](int c, long long t, std::span<const double> vals, double scale,
                            double gain) {
        std::vector<double> symbols(static_cast<std::size_t>(k_r));
        if (pattern.pure_square()) {
            const int idx = base.nearest_real(vals[0], scale);
            symbols[0] = base.points[idx].real();
            out.point_indices[global_index(0, c, t)] = idx;
            out.symbols[global_index(0, c, t)] = symbols[0];
        } else {
            std::vector<double> ytilde(vals.size());
            for (std::size_t b = 0; b < vals.size(); ++b) ytilde[b] = vals[b] / scale;
            RectDetection rect = detect_rect(ytilde, pattern.rect_factors(), base,
                                             noise_variance / gain, opts);
            out.mud_candidates += rect.mud_candidates;
            merge_status(out, rect.status,
                         "super-group (row " + std::to_string(c) + ", tail " +
                             std::to_string(t + 1) + "): " + rect.failure);
            for (long long u = 0; u < k_r; ++u) {
                symbols[static_cast<std::size_t>(u)] = rect.symbols[static_cast<std::size_t>(u)];
                out.symbols[global_index(u, c, t)] = rect.symbols[static_cast<std::size_t>(u)];
                out.point_indices[global_index(u, c, t)] =
                    rect.point_indices[static_cast<std::size_t>(u)];
            }
        }
        // Cache F * x_hat (or the genie symbols) for later cancellations.
        std::vector<double> source = symbols;
        if (mode == SicMode::Genie)
            for (long long u = 0; u < k_r; ++u)
                source[static_cast<std::size_t>(u)] = true_symbols[global_index(u, c, t)];
        std::vector<double>& fx = decided_f[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
        fx.assign(static_cast<std::size_t>(m_r), 0.0);
        if (pattern.pure_square()) {
            fx[0] = source[0];
        } else {
            for (long long b = 0; b < m_r; ++b) {
                double acc = 0;
                for (long long u = 0; u < k_r; ++u)
                    if (f_rect.at(static_cast<int>(b), static_cast<int>(u)))
                        acc += source[static_cast<std::size_t>(u)];
                fx[static_cast<std::size_t>(b)] = acc;
            }
        }
    };

    auto standard_decide = [&](int c) {
        std::vector<double> vals(static_cast<std::size_t>(m_r));
        for (long long t = 0; t < tail_n; ++t) {
            for (long long b = 0; b < m_r; ++b) {
                double acc = 0;
                for (int j = 0; j < m1; ++j) {
                    const int coeff = d1.alpha_at(c - 1, j);
                    if (coeff > 0)
                        acc += input(b, j, t);
                    else if (coeff < 0)
                        acc -= input(b, j, t);
                }
                vals[static_cast<std::size_t>(b)] = acc;
            }
            out.combine_adds += static_cast<std::uint64_t>(m_r) * (m1 - 1);
            const double scale =
                static_cast<double>(d1.weights[c - 1]) * static_cast<double>(tail_scales[t]);
            const double gain =
                (d1.gains[c - 1] * tail_gains[static_cast<std::size_t>(t)]).to_double();
            decide_group(c, t, vals, scale, gain);
        }
        decided_cols.insert(c);
    };

    std::set<int> analysis_decided;
    for (const auto& step : policy.steps) {
        for (int c : step.detect) {
            if (!decided_cols.count(c)) standard_decide(c);
            analysis_decided.insert(c);
        }
        for (const auto& r : step.reforms) {
            const ReformAnalysis a = analyze_reform(d1, r, analysis_decided);
            std::vector<double> vals(static_cast<std::size_t>(m_r));
            for (long long t = 0; t < tail_n; ++t) {
                const double w_tail = static_cast<double>(tail_scales[t]);
                for (long long b = 0; b < m_r; ++b) {
                    double acc = 0;
                    for (int j = 0; j < m1; ++j) {
                        if (a.alpha[j] > 0)
                            acc += input(b, j, t);
                        else if (a.alpha[j] < 0)
                            acc -= input(b, j, t);
                    }
                    // Cancel the decided rows' known contributions.
                    for (int i : r.subtract) {
                        const double fx =
                            decided_f[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]
                                     [static_cast<std::size_t>(b)];
                        acc -= static_cast<double>(a.coeff[i - 1]) * w_tail * fx;
                    }
                    vals[static_cast<std::size_t>(b)] = acc;
                }
                out.combine_adds +=
                    static_cast<std::uint64_t>(m_r) * (a.nnz - 1 + r.subtract.size());
                const double scale = static_cast<double>(a.c_target) * w_tail;
                const double gain =
                    (a.row_gain * tail_gains[static_cast<std::size_t>(t)]).to_double();
                decide_group(r.target, t, vals, scale, gain);
            }
            decided_cols.insert(r.target);
            analysis_decided.insert(r.target);
        }
    }
    for (int c = 1; c <= m1; ++c)
        if (!decided_cols.count(c)) standard_decide(c);
    return out;
}

SicPolicy sic_policy_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sic policy json: parse failure: ") + e.what());
    }
    SicPolicy policy;
    if (!j.contains("steps") || !j.at("steps").is_array())
        throw ConfigError("sic policy json: needs a \"steps\" array");
    for (const auto& js : j.at("steps")) {
        SicStep step;
        if (js.contains("detect"))
            for (const auto& v : js.at("detect")) step.detect.push_back(v.get<int>());
        if (js.contains("reform"))
            for (const auto& jr : js.at("reform")) {
                SicReform r;
                r.target = jr.at("target").get<int>();
                for (const auto& v : jr.at("from")) r.from.push_back(v.get<int>());
                if (jr.contains("subtract"))
                    for (const auto& v : jr.at("subtract")) r.subtract.push_back(v.get<int>());
                step.reforms.push_back(std::move(r));
            }
        policy.steps.push_back(std::move(step));
    }
    return policy;
}

SicPolicy load_sic_policy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read sic policy file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sic_policy_from_json(ss.str());
}

}  // namespace kronoma
