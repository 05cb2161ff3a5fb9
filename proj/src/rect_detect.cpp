#include "kronoma/rect_detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>

#include "kronoma/errors.hpp"

namespace kronoma {

namespace {

std::uint64_t checked_pow(std::size_t base, int exp, std::uint64_t cap) {
    std::uint64_t total = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && total > cap / base)
            throw InfeasibleError("mud_map: search space exceeds the candidate cap");
        total *= base;
    }
    if (total > cap) throw InfeasibleError("mud_map: search space exceeds the candidate cap");
    return total;
}

std::string path_str(std::span<const int> path) {
    std::string s = "(";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) s += ",";
        s += "j" + std::to_string(i + 1) + "=" + std::to_string(path[i]);
    }
    return s + ")";
}

}  // namespace

MudResult mud_map(const BinaryMatrix& f, std::span<const double> y,
                  std::span<const double> symbol_space, double noise_variance,
                  const DetectOptions& opts, std::span<const double> column_scales) {
    const int m = f.rows(), k = f.cols();
    if (static_cast<int>(y.size()) != m)
        throw ConfigError("mud_map: observation length does not match the factor rows");
    if (!column_scales.empty() && static_cast<int>(column_scales.size()) != k)
        throw ConfigError("mud_map: column scale count does not match the factor columns");
    if (symbol_space.empty()) throw ConfigError("mud_map: empty symbol space");
    checked_pow(symbol_space.size(), k, opts.mud_cap);

    // Squared-residual threshold for the exact-match (noiseless) mode.
    double tol_sq = 0;
    for (double v : y) {
        const double t = opts.exact_tol_rel * std::max(1.0, std::abs(v));
        tol_sq += t * t;
    }

    const int space_n = static_cast<int>(symbol_space.size());
    std::vector<int> idx(k, 0);
    std::vector<double> z(k);
    auto symbol_at = [&](int c) {
        const double s = column_scales.empty() ? 1.0 : column_scales[c];
        return symbol_space[idx[c]] * s;
    };
    for (int c = 0; c < k; ++c) z[c] = symbol_at(c);

    MudResult best;
    best.residual = std::numeric_limits<double>::infinity();
    std::vector<int> exact_idx;
    std::uint64_t exact_count = 0;

    for (;;) {
        ++best.candidates;
        double resid = 0;
        for (int r = 0; r < m; ++r) {
            double acc = 0;
            for (int c = 0; c < k; ++c)
                if (f.at(r, c)) acc += z[c];
            const double d = y[r] - acc;
            resid += d * d;
        }
        if (resid < best.residual) {
            best.residual = resid;
            best.indices = idx;
        }
        if (resid <= tol_sq) {
            if (exact_count == 0) exact_idx = idx;
            ++exact_count;
        }
        // Odometer with the first unknown slowest: candidates appear in
        // lexicographic index order, so the first strict minimum (or first
        // exact match) is the documented tie-break winner.
        int j = k - 1;
        while (j >= 0 && idx[j] == space_n - 1) --j;
        if (j < 0) break;
        ++idx[j];
        std::fill(idx.begin() + j + 1, idx.end(), 0);
        for (int c = j; c < k; ++c) z[c] = symbol_at(c);
    }

    if (noise_variance == 0.0) {
        if (exact_count == 0)
            best.status = DetectStatus::Infeasible;  // caller may resolve via fallback
        else {
            best.indices = exact_idx;
            best.status = exact_count > 1 ? DetectStatus::Ambiguous : DetectStatus::Ok;
        }
    }
    best.symbols.resize(k);
    for (int c = 0; c < k; ++c) {
        const double s = column_scales.empty() ? 1.0 : column_scales[c];
        best.symbols[c] = symbol_space[best.indices[c]] * s;
    }
    return best;
}

SuperGroupIndex index_map(int l_prime, std::span<const int> path,
                          std::span<const BinaryMatrix> factors) {
    const int levels = static_cast<int>(factors.size());
    if (l_prime < 1 || l_prime > levels) throw ConfigError("index_map: recursion out of range");
    if (static_cast<int>(path.size()) != l_prime - 1)
        throw ConfigError("index_map: path must name one super-group per completed recursion");
    // kappa_i = product of the k's of the last i factors.
    std::vector<long long> kappa(l_prime, 1);
    for (int i = 1; i < l_prime; ++i) kappa[i] = kappa[i - 1] * factors[levels - i].cols();
    for (int i = 0; i < l_prime - 1; ++i) {
        const int k_i = factors[levels - 1 - i].cols();
        if (path[i] < 1 || path[i] > k_i) throw ConfigError("index_map: path index out of range");
    }
    SuperGroupIndex out;
    out.kappa = kappa[l_prime - 1];
    if (l_prime == 1) return out;
    out.tau = path[0];
    out.psi = path[l_prime - 2];
    for (int i = 1; i <= l_prime - 2; ++i) {
        out.tau += static_cast<long long>(path[i] - 1) * kappa[i];
        out.psi += static_cast<long long>(path[i - 1] - 1) * (kappa[l_prime - 1] / kappa[i]);
    }
    return out;
}

RectDetection detect_rect(std::span<const double> y, std::span<const BinaryMatrix> factors,
                          const Constellation& base, double noise_variance,
                          const DetectOptions& opts, std::span<const double> user_scales) {
    if (factors.empty()) throw ConfigError("detect_rect: no factors");
    const int levels = static_cast<int>(factors.size());
    long long m_total = 1, k_total = 1;
    for (const auto& f : factors) {
        m_total *= f.rows();
        k_total *= f.cols();
    }
    if (static_cast<long long>(y.size()) != m_total)
        throw ConfigError("detect_rect: signal length does not match the factor rows");
    if (!user_scales.empty() && levels > 1)
        throw ConfigError("detect_rect: per-user scales need a single-factor pattern "
                          "(heterogeneous scales do not fold through sum alphabets)");
    const std::vector<double> base_points = base.real_points();

    struct Group {
        std::vector<double> values;
        std::vector<int> point_idx;  // populated by the final recursion
        long long tau = 1;
        long long kappa = 1;
        std::vector<int> path;
    };
    std::vector<Group> groups(1);
    groups[0].values.assign(y.begin(), y.end());

    // Row weights of the prefix products R^(l) = F^(1) (x) ... (x) F^(l).
    // The unknowns of the system built on R^(l) row i+1 are sums of exactly
    // that row's weight many base symbols, which is the alphabet that is both
    // tight and guaranteed to contain the true value (the order-K_l worst
    // case can miss it outright when the parities differ).
    std::vector<std::vector<int>> prefix_weights(factors.size());
    {
        std::vector<int> acc{1};
        for (std::size_t l = 0; l < factors.size(); ++l) {
            prefix_weights[l] = acc;
            std::vector<int> next;
            next.reserve(acc.size() * static_cast<std::size_t>(factors[l].rows()));
            for (int w : acc)
                for (int r = 0; r < factors[l].rows(); ++r)
                    next.push_back(w * factors[l].row_weight(r));
            acc = std::move(next);
        }
    }
    std::map<int, std::vector<double>> space_cache;
    auto space_for = [&](int weight) -> const std::vector<double>& {
        auto [it, fresh] = space_cache.try_emplace(weight);
        if (fresh) {
            if (weight == 0)
                it->second = {0.0};  // an all-zero row contributes nothing
            else if (weight == 1)
                it->second = base_points;
            else
                it->second = sumset(base_points, weight).points;
        }
        return it->second;
    };

    RectDetection out;
    out.symbols.assign(static_cast<std::size_t>(k_total), 0.0);
    out.point_indices.assign(static_cast<std::size_t>(k_total), 0);

    auto note_failure = [&](DetectStatus s, int level, const Group& g, int system) {
        if (out.status == DetectStatus::Infeasible) return;  // keep the first hard failure
        if (s == DetectStatus::Infeasible || out.status == DetectStatus::Ok) {
            out.status = s;
            out.failure = std::string(s == DetectStatus::Infeasible ? "infeasible" : "ambiguous") +
                          " at recursion " + std::to_string(level) + ", super-group path " +
                          path_str(g.path) + ", system " + std::to_string(system + 1);
        }
    };

    for (int lp = 1; lp <= levels; ++lp) {
        const int fl = levels - lp;  // 0-based factor index l'' - 1
        const auto& f = factors[fl];
        const int m = f.rows(), k = f.cols();
        long long sum_order = 1;
        for (int t = 0; t < fl; ++t) sum_order *= factors[t].cols();
        const bool final_level = lp == levels;
        const double noise = lp == 1 ? noise_variance : 0.0;

        RecursionTrace trace;
        trace.level = lp;
        trace.factor = fl + 1;
        trace.sumset_order = static_cast<int>(sum_order);
        trace.space_size = 0;

        std::vector<Group> next;
        for (auto& g : groups) {
            const int systems = static_cast<int>(g.values.size()) / m;
            std::vector<MudResult> solved(systems);
            for (int i = 0; i < systems; ++i) {
                const auto& space = space_for(prefix_weights[static_cast<std::size_t>(fl)]
                                                            [static_cast<std::size_t>(i)]);
                trace.space_size = std::max(trace.space_size, space.size());
                solved[i] = mud_map(f, std::span<const double>(g.values).subspan(
                                           static_cast<std::size_t>(i) * m, m),
                                    space, noise, opts,
                                    final_level ? user_scales : std::span<const double>{});
                out.mud_candidates += solved[i].candidates;
                ++trace.systems;
                if (solved[i].status != DetectStatus::Ok) {
                    note_failure(solved[i].status, lp, g, i);
                    if (solved[i].status == DetectStatus::Infeasible && !opts.fallback_nearest) {
                        out.trace.push_back(std::move(trace));
                        return out;
                    }
                }
            }
            for (int j = 0; j < k; ++j) {
                Group ng;
                ng.tau = g.tau + static_cast<long long>(j) * g.kappa;
                ng.kappa = g.kappa * k;
                ng.path = g.path;
                ng.path.push_back(j + 1);
                ng.values.resize(systems);
                if (final_level) ng.point_idx.resize(systems);
                for (int i = 0; i < systems; ++i) {
                    ng.values[i] = solved[i].symbols[j];
                    if (final_level) ng.point_idx[i] = solved[i].indices[j];
                }
                next.push_back(std::move(ng));
            }
        }
        groups = std::move(next);
        for (const auto& g : groups) {
            SuperGroupTrace gt;
            gt.path = g.path;
            gt.tau = g.tau;
            gt.kappa = g.kappa;
            gt.values = g.values;
            trace.groups.push_back(std::move(gt));
        }
        out.trace.push_back(std::move(trace));
    }

    for (const auto& g : groups) {
        out.symbols[static_cast<std::size_t>(g.tau - 1)] = g.values[0];
        out.point_indices[static_cast<std::size_t>(g.tau - 1)] = g.point_idx[0];
    }
    return out;
}

}  // namespace kronoma
