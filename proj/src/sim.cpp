#include "kronoma/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include <omp.h>

#include "kronoma/errors.hpp"
#include "kronoma/rng.hpp"
#include "kronoma/sq_detect.hpp"

namespace kronoma {

double snr_db_to_rho(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

namespace {

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// One real detection dimension: a real alphabet plus the label bits each
// point carries.  A real base is one dimension; QPSK Gray-splits into two.
struct Dim {
    Constellation alphabet;             // real-valued
    std::vector<std::uint32_t> labels;  // per base point: this dimension's bits
    std::vector<double> values;         // per base point: this dimension's component
    int bits = 1;
};

std::vector<Dim> split_dims(const Constellation& base) {
    std::vector<Dim> dims;
    if (base.is_real()) {
        Dim d;
        d.alphabet = base;
        d.labels = base.labels;
        for (const auto& p : base.points) d.values.push_back(p.real());
        d.bits = base.bits_per_symbol;
        dims.push_back(std::move(d));
        return dims;
    }
    if (base.name != "qpsk")
        throw ConfigError("simulator: complex constellation " + base.name +
                          " has no per-dimension split");
    // I carries the label MSB, Q the LSB; each half is a BPSK alphabet at
    // half power, matching the sigma^2/2 per-dimension noise convention.
    const double a = std::abs(base.points.front().real());
    for (int d = 0; d < 2; ++d) {
        Dim dim;
        dim.alphabet.name = "qpsk-dim";
        dim.alphabet.points = {{-a, 0.0}, {+a, 0.0}};
        dim.alphabet.labels = {1, 0};
        dim.alphabet.bits_per_symbol = 1;
        for (std::size_t p = 0; p < base.points.size(); ++p) {
            const double v = d == 0 ? base.points[p].real() : base.points[p].imag();
            dim.values.push_back(v);
            dim.labels.push_back((base.labels[p] >> (d == 0 ? 1 : 0)) & 1u);
        }
        dim.bits = 1;
        dims.push_back(std::move(dim));
    }
    return dims;
}

int nearest_point(std::span<const double> points, double v, double scale) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::abs(v - scale * points[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

// Flattened SIC program for the pure-square fast path: final-recursion rows
// in execution order, each either a standard combining row or a reform.
struct SicOp {
    int col = 1;  // 1-based row of the final square factor
    std::vector<int> alpha;
    long long weight = 1;                             // own-column coefficient
    std::vector<std::pair<int, long long>> subtract;  // (decided col, coefficient)
};

struct Precomp {
    BinaryMatrix g;                              // expanded pattern
    std::vector<std::vector<int>> row_support;   // per RE, user indices
    std::vector<Dim> dims;
    double power = 1;                            // P_x = mean point energy
    // square fast path
    bool pure_square = false;
    std::vector<long long> scales;               // W_i
    // SIC program (pure square only)
    std::vector<SicOp> sic_ops;
    std::vector<long long> tail_scales;
    long long tail_n = 1;
    int m1 = 1;
};

Precomp precompute(const SimConfig& cfg) {
    Precomp pre;
    pre.g = cfg.pattern.expand();
    pre.row_support.resize(static_cast<std::size_t>(pre.g.rows()));
    for (int r = 0; r < pre.g.rows(); ++r)
        for (int c = 0; c < pre.g.cols(); ++c)
            if (pre.g.at(r, c)) pre.row_support[static_cast<std::size_t>(r)].push_back(c);
    pre.dims = split_dims(cfg.base);
    double p = 0;
    for (const auto& pt : cfg.base.points) p += std::norm(pt);
    pre.power = p / static_cast<double>(cfg.base.points.size());
    pre.pure_square = cfg.pattern.pure_square();
    if (pre.pure_square) {
        const auto& designs = cfg.pattern.square_designs();
        pre.scales = scale_table(designs);
        if (!cfg.sic.empty()) {
            sic_revised_gains(cfg.pattern, cfg.sic);  // full policy validation
            const auto& d1 = designs.front();
            pre.m1 = d1.dim();
            pre.tail_n = cfg.pattern.square_size() / pre.m1;
            pre.tail_scales =
                scale_table(std::span<const SquareFactorDesign>(designs).subspan(1));
            std::vector<bool> done(static_cast<std::size_t>(pre.m1 + 1), false);
            auto standard_op = [&](int c) {
                SicOp op;
                op.col = c;
                op.alpha.resize(static_cast<std::size_t>(pre.m1));
                for (int j = 0; j < pre.m1; ++j)
                    op.alpha[static_cast<std::size_t>(j)] = d1.alpha_at(c - 1, j);
                op.weight = d1.weights[static_cast<std::size_t>(c - 1)];
                return op;
            };
            for (const auto& step : cfg.sic.steps) {
                for (int c : step.detect) {
                    if (!done[static_cast<std::size_t>(c)]) {
                        pre.sic_ops.push_back(standard_op(c));
                        done[static_cast<std::size_t>(c)] = true;
                    }
                }
                for (const auto& r : step.reforms) {
                    SicOp op;
                    op.col = r.target;
                    op.alpha.assign(static_cast<std::size_t>(pre.m1), 0);
                    for (int j : r.from)
                        op.alpha[static_cast<std::size_t>(std::abs(j) - 1)] = j < 0 ? -1 : 1;
                    std::vector<long long> coeff(static_cast<std::size_t>(pre.m1), 0);
                    for (int i = 0; i < pre.m1; ++i)
                        for (int j = 0; j < pre.m1; ++j)
                            coeff[static_cast<std::size_t>(i)] +=
                                op.alpha[static_cast<std::size_t>(j)] * d1.p.at(j, i);
                    op.weight = coeff[static_cast<std::size_t>(r.target - 1)];
                    for (int i : r.subtract)
                        op.subtract.emplace_back(i, coeff[static_cast<std::size_t>(i - 1)]);
                    pre.sic_ops.push_back(std::move(op));
                    done[static_cast<std::size_t>(r.target)] = true;
                }
            }
            for (int c = 1; c <= pre.m1; ++c)
                if (!done[static_cast<std::size_t>(c)]) pre.sic_ops.push_back(standard_op(c));
        }
    }
    return pre;
}

struct Workspace {
    std::vector<int> point_idx;       // drawn base point per user
    std::vector<double> x;            // per-dimension symbol values
    std::vector<double> y;
    std::vector<double> decided;      // cancellation values per user slot
    std::vector<std::uint32_t> det;   // detected per-dimension labels per user
};

struct LaneSpec {
    bool sic = false;
};

class Engine {
  public:
    Engine(const SimConfig& cfg, std::vector<LaneSpec> lanes)
        : cfg_(cfg), lanes_(std::move(lanes)), pre_(precompute(cfg)) {
        validate();
        users_ = cfg_.tracked_users;
        if (users_.empty())
            for (long long u = 1; u <= cfg_.pattern.total_cols(); ++u)
                users_.push_back(static_cast<int>(u));
    }

    std::vector<BerResult> run(bool parallel) const;

  private:
    void validate() const {
        if (cfg_.trials < 1) throw ConfigError("simulator: trials must be >= 1");
        if (cfg_.snr_db.empty()) throw ConfigError("simulator: empty SNR grid");
        const long long m = cfg_.pattern.total_rows(), k = cfg_.pattern.total_cols();
        for (int u : cfg_.tracked_users)
            if (u < 1 || u > k) throw ConfigError("simulator: tracked user out of range");
        const auto& fad = cfg_.fading;
        if (fad.kind == FadingConfig::Kind::Downlink) {
            if (static_cast<long long>(fad.gains.size()) != m)
                throw ConfigError("simulator: downlink fading needs one gain per RE");
            for (double h : fad.gains)
                if (h == 0) throw InfeasibleError("simulator: zero-gain RE");
        } else if (fad.kind == FadingConfig::Kind::Uplink) {
            if (static_cast<long long>(fad.gains.size()) != k)
                throw ConfigError("simulator: uplink fading needs one gain per user");
            for (double h : fad.gains)
                if (h == 0) throw InfeasibleError("simulator: zero-gain user is undetectable");
            if (!cfg_.sic.empty())
                throw ConfigError("simulator: uplink fading with SIC is not modeled");
            if (!cfg_.pattern.pure_square() && cfg_.pattern.rect_factors().size() > 1)
                throw ConfigError("simulator: uplink fading needs a square or single-factor "
                                  "rectangular pattern");
        }
        bool any_sic = false;
        for (const auto& l : lanes_) any_sic |= l.sic;
        if (any_sic && cfg_.sic.empty())
            throw ConfigError("simulator: SIC lane without a policy");
        if (any_sic && !cfg_.pattern.pure_square())
            sic_revised_gains(cfg_.pattern, cfg_.sic);  // validates against the pattern
    }

    // Returns per-lane bit errors for the tracked users, accumulated into
    // `errors` (lane-major, then user), and the noise checksum delta.
    void trial(std::uint32_t snr_idx, std::uint64_t trial_idx, double sigma_dim,
               Workspace& ws, std::uint64_t* errors, std::uint64_t& checksum) const;

    void detect_plain_square(std::span<const double> y, std::span<std::uint32_t> det,
                             const Dim& dim) const;
    void detect_sic_square(Workspace& ws, std::span<const double> y,
                           std::span<std::uint32_t> det, const Dim& dim, bool genie) const;

    const SimConfig& cfg_;
    std::vector<LaneSpec> lanes_;
    Precomp pre_;
    std::vector<int> users_;
};

void Engine::detect_plain_square(std::span<const double> y, std::span<std::uint32_t> det,
                                 const Dim& dim) const {
    // det holds one label per user; y is consumed via a scratch copy in work.
    thread_local std::vector<double> scratch;
    scratch.assign(y.begin(), y.end());
    combine_square_inplace(scratch, cfg_.pattern.square_designs());
    const auto pts = dim.alphabet.real_points();
    const bool uplink = cfg_.fading.kind == FadingConfig::Kind::Uplink;
    for (std::size_t u = 0; u < scratch.size(); ++u) {
        double scale = static_cast<double>(pre_.scales[u]);
        if (uplink) scale *= cfg_.fading.gains[u];
        det[u] = dim.alphabet.labels[static_cast<std::size_t>(
            nearest_point(pts, scratch[u], scale))];
    }
}

void Engine::detect_sic_square(Workspace& ws, std::span<const double> y,
                               std::span<std::uint32_t> det, const Dim& dim,
                               bool genie) const {
    thread_local std::vector<double> scratch;
    scratch.assign(y.begin(), y.end());
    combine_square_suffix(scratch, cfg_.pattern.square_designs(), 1);
    const auto pts = dim.alphabet.real_points();
    const long long tail_n = pre_.tail_n;
    for (const auto& op : pre_.sic_ops) {
        for (long long t = 0; t < tail_n; ++t) {
            double acc = 0;
            for (int j = 0; j < pre_.m1; ++j) {
                const int c = op.alpha[static_cast<std::size_t>(j)];
                if (c > 0)
                    acc += scratch[static_cast<std::size_t>(j * tail_n + t)];
                else if (c < 0)
                    acc -= scratch[static_cast<std::size_t>(j * tail_n + t)];
            }
            const double w_tail = static_cast<double>(pre_.tail_scales[static_cast<std::size_t>(t)]);
            for (const auto& [col, coeff] : op.subtract)
                acc -= static_cast<double>(coeff) * w_tail *
                       ws.decided[static_cast<std::size_t>((col - 1) * tail_n + t)];
            const std::size_t user = static_cast<std::size_t>((op.col - 1) * tail_n + t);
            const int idx = nearest_point(pts, acc, static_cast<double>(op.weight) * w_tail);
            det[user] = dim.alphabet.labels[static_cast<std::size_t>(idx)];
            ws.decided[user] = genie ? ws.x[user] : pts[static_cast<std::size_t>(idx)];
        }
    }
}

void Engine::trial(std::uint32_t snr_idx, std::uint64_t trial_idx, double sigma_dim,
                   Workspace& ws, std::uint64_t* errors, std::uint64_t& checksum) const {
    TrialRng rng(cfg_.seed, snr_idx, trial_idx);
    const long long m = cfg_.pattern.total_rows();
    const long long k = cfg_.pattern.total_cols();
    const auto n_points = static_cast<std::uint32_t>(cfg_.base.points.size());
    for (long long u = 0; u < k; ++u)
        ws.point_idx[static_cast<std::size_t>(u)] = static_cast<int>(rng.index(n_points));

    const bool uplink = cfg_.fading.kind == FadingConfig::Kind::Uplink;
    const bool downlink = cfg_.fading.kind == FadingConfig::Kind::Downlink;
    for (std::size_t d = 0; d < pre_.dims.size(); ++d) {
        const Dim& dim = pre_.dims[d];
        for (long long u = 0; u < k; ++u) {
            double v = dim.values[static_cast<std::size_t>(
                ws.point_idx[static_cast<std::size_t>(u)])];
            if (uplink) v *= cfg_.fading.gains[static_cast<std::size_t>(u)];
            ws.x[static_cast<std::size_t>(u)] = v;
        }
        for (long long r = 0; r < m; ++r) {
            double acc = 0;
            for (int c : pre_.row_support[static_cast<std::size_t>(r)])
                acc += ws.x[static_cast<std::size_t>(c)];
            if (downlink) acc *= cfg_.fading.gains[static_cast<std::size_t>(r)];
            if (sigma_dim > 0) {
                const double g = rng.gaussian();
                checksum += std::bit_cast<std::uint64_t>(g);
                acc += sigma_dim * g;
            }
            if (downlink) acc /= cfg_.fading.gains[static_cast<std::size_t>(r)];
            ws.y[static_cast<std::size_t>(r)] = acc;
        }

        for (std::size_t lane = 0; lane < lanes_.size(); ++lane) {
            bool failed = false;
            if (pre_.pure_square) {
                if (lanes_[lane].sic)
                    detect_sic_square(ws, ws.y, ws.det, dim,
                                      cfg_.sic_mode == SicMode::Genie);
                else
                    detect_plain_square(ws.y, ws.det, dim);
            } else {
                std::span<const double> scales =
                    uplink ? std::span<const double>(cfg_.fading.gains)
                           : std::span<const double>{};
                GeneralDetection g;
                if (lanes_[lane].sic)
                    g = detect_with_sic(ws.y, cfg_.pattern, dim.alphabet,
                                        sigma_dim * sigma_dim, cfg_.sic, cfg_.sic_mode, ws.x,
                                        cfg_.detect);
                else
                    g = detect_general(ws.y, cfg_.pattern, dim.alphabet, sigma_dim * sigma_dim,
                                       cfg_.detect, scales);
                failed = g.status == DetectStatus::Infeasible;
                if (!failed)
                    for (long long u = 0; u < k; ++u)
                        ws.det[static_cast<std::size_t>(u)] =
                            dim.alphabet.labels[static_cast<std::size_t>(
                                g.point_indices[static_cast<std::size_t>(u)])];
            }
            for (std::size_t ui = 0; ui < users_.size(); ++ui) {
                const std::size_t u = static_cast<std::size_t>(users_[ui] - 1);
                const std::uint32_t truth = dim.labels[static_cast<std::size_t>(
                    ws.point_idx[u])];
                const std::uint32_t diff =
                    failed ? ((1u << dim.bits) - 1) : (ws.det[u] ^ truth);
                errors[lane * users_.size() + ui] +=
                    static_cast<std::uint64_t>(std::popcount(diff));
            }
        }
    }
}

std::vector<BerResult> Engine::run(bool parallel) const {
    const std::size_t lane_n = lanes_.size();
    const std::size_t user_n = users_.size();
    const std::size_t snr_n = cfg_.snr_db.size();
    std::vector<BerResult> out(lane_n);
    for (auto& r : out) {
        r.users = users_;
        r.snr_db = cfg_.snr_db;
        r.cells.assign(user_n * snr_n, BerCell{});
    }
    int threads = cfg_.threads;
    if (threads <= 0) threads = omp_get_max_threads();
    if (!parallel) threads = 1;

    const int bits = cfg_.base.bits_per_symbol;
    for (std::size_t s = 0; s < snr_n; ++s) {
        double sigma_dim = 0;
        if (!std::isinf(cfg_.snr_db[s])) {
            const double rho = snr_db_to_rho(cfg_.snr_db[s]);
            sigma_dim = std::sqrt(pre_.power / (2.0 * rho));
        }
        std::vector<std::uint64_t> errors(lane_n * user_n, 0);
        std::uint64_t checksum = 0;
        const long long trials = static_cast<long long>(cfg_.trials);
#pragma omp parallel num_threads(threads) if (parallel)
        {
            Workspace ws;
            const std::size_t m = static_cast<std::size_t>(cfg_.pattern.total_rows());
            const std::size_t k = static_cast<std::size_t>(cfg_.pattern.total_cols());
            ws.point_idx.resize(k);
            ws.x.resize(k);
            ws.y.resize(m);
            ws.decided.assign(k, 0.0);
            ws.det.assign(k, 0);
            std::vector<std::uint64_t> local(errors.size(), 0);
            std::uint64_t local_ck = 0;
#pragma omp for schedule(static)
            for (long long t = 0; t < trials; ++t)
                trial(static_cast<std::uint32_t>(s), static_cast<std::uint64_t>(t), sigma_dim,
                      ws, local.data(), local_ck);
#pragma omp critical
            {
                for (std::size_t i = 0; i < errors.size(); ++i) errors[i] += local[i];
                checksum += local_ck;
            }
        }
        for (std::size_t lane = 0; lane < lane_n; ++lane) {
            out[lane].noise_checksum += checksum;
            for (std::size_t ui = 0; ui < user_n; ++ui) {
                BerCell& cell = out[lane].cells[ui * snr_n + s];
                cell.trials = cfg_.trials;
                cell.errors = errors[lane * user_n + ui];
                const double n = static_cast<double>(cfg_.trials) * bits;
                const double p = static_cast<double>(cell.errors) / n;
                cell.ber = p;
                // 95% Wilson interval.
                const double z = 1.959963984540054;
                const double z2 = z * z;
                const double denom = 1.0 + z2 / n;
                const double center = p + z2 / (2.0 * n);
                const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
                cell.ci_lo = std::max(0.0, (center - half) / denom);
                cell.ci_hi = std::min(1.0, (center + half) / denom);
            }
        }
    }
    return out;
}

std::vector<BerResult> run_lanes(const SimConfig& cfg, std::vector<LaneSpec> lanes,
                                 bool parallel) {
    Engine engine(cfg, std::move(lanes));
    return engine.run(parallel);
}

}  // namespace

BerResult simulate_ber(const SimConfig& cfg) {
    return run_lanes(cfg, {LaneSpec{.sic = !cfg.sic.empty()}}, true)[0];
}

BerResult simulate_ber_serial(const SimConfig& cfg) {
    return run_lanes(cfg, {LaneSpec{.sic = !cfg.sic.empty()}}, false)[0];
}

SicComparison simulate_ber_sic(const SimConfig& cfg) {
    if (cfg.sic.empty()) {
        // Degenerate pairing: both lanes run the plain detector.
        auto lanes = run_lanes(cfg, {LaneSpec{false}, LaneSpec{false}}, true);
        return {std::move(lanes[0]), std::move(lanes[1])};
    }
    auto lanes = run_lanes(cfg, {LaneSpec{false}, LaneSpec{true}}, true);
    return {std::move(lanes[0]), std::move(lanes[1])};
}

namespace {

double crossing_snr(const BerResult& r, int user, double target) {
    std::size_t ui = r.users.size();
    for (std::size_t i = 0; i < r.users.size(); ++i)
        if (r.users[i] == user) ui = i;
    if (ui == r.users.size()) throw ConfigError("shift_db_at: user not tracked");
    for (std::size_t s = 0; s + 1 < r.snr_db.size(); ++s) {
        const double b0 = r.at(ui, s).ber, b1 = r.at(ui, s + 1).ber;
        if (b0 <= 0 || b1 <= 0) continue;
        if ((b0 >= target && b1 <= target) || (b0 <= target && b1 >= target)) {
            if (b0 == b1) return 0.5 * (r.snr_db[s] + r.snr_db[s + 1]);
            const double f = (std::log10(target) - std::log10(b0)) /
                             (std::log10(b1) - std::log10(b0));
            return r.snr_db[s] + f * (r.snr_db[s + 1] - r.snr_db[s]);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double SicComparison::shift_db_at(double target_ber, int user) const {
    return crossing_snr(baseline, user, target_ber) - crossing_snr(with_sic, user, target_ber);
}

DownlinkNormalized apply_downlink_fading(std::span<const double> y, std::span<const double> h,
                                         double sigma2) {
    if (y.size() != h.size())
        throw ConfigError("apply_downlink_fading: gain count must match the RE count");
    DownlinkNormalized out;
    out.y.resize(y.size());
    out.noise_variances.resize(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) {
        if (h[m] == 0) throw InfeasibleError("apply_downlink_fading: zero-gain RE");
        out.y[m] = y[m] / h[m];
        out.noise_variances[m] = sigma2 / (h[m] * h[m]);
    }
    return out;
}

std::vector<double> apply_uplink_fading(std::span<const double> x, std::span<const double> h) {
    if (x.size() != h.size())
        throw ConfigError("apply_uplink_fading: gain count must match the user count");
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (h[k] == 0) throw InfeasibleError("apply_uplink_fading: zero-gain user");
        out[k] = x[k] * h[k];
    }
    return out;
}

std::string ber_csv(const BerResult& r) {
    std::string out = "user,snr_db,trials,errors,ber,ci_lo,ci_hi\n";
    for (std::size_t ui = 0; ui < r.users.size(); ++ui)
        for (std::size_t s = 0; s < r.snr_db.size(); ++s) {
            const BerCell& c = r.at(ui, s);
            out += std::to_string(r.users[ui]) + "," + fmt_g(r.snr_db[s]) + "," +
                   std::to_string(c.trials) + "," + std::to_string(c.errors) + "," +
                   fmt_g(c.ber) + "," + fmt_g(c.ci_lo) + "," + fmt_g(c.ci_hi) + "\n";
        }
    return out;
}

BerResult ber_csv_parse(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "user,snr_db,trials,errors,ber,ci_lo,ci_hi")
        throw ConfigError("ber csv: unexpected header");
    BerResult r;
    std::vector<std::tuple<int, double, BerCell>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7) throw ConfigError("ber csv: malformed row: " + line);
        BerCell c;
        const int user = std::stoi(fields[0]);
        const double snr = std::stod(fields[1]);
        c.trials = std::stoull(fields[2]);
        c.errors = std::stoull(fields[3]);
        c.ber = std::stod(fields[4]);
        c.ci_lo = std::stod(fields[5]);
        c.ci_hi = std::stod(fields[6]);
        rows.emplace_back(user, snr, c);
        if (std::find(r.users.begin(), r.users.end(), user) == r.users.end())
            r.users.push_back(user);
        if (std::find(r.snr_db.begin(), r.snr_db.end(), snr) == r.snr_db.end())
            r.snr_db.push_back(snr);
    }
    r.cells.assign(r.users.size() * r.snr_db.size(), BerCell{});
    for (const auto& [user, snr, cell] : rows) {
        const std::size_t ui = static_cast<std::size_t>(
            std::find(r.users.begin(), r.users.end(), user) - r.users.begin());
        const std::size_t si = static_cast<std::size_t>(
            std::find(r.snr_db.begin(), r.snr_db.end(), snr) - r.snr_db.begin());
        r.cells[ui * r.snr_db.size() + si] = cell;
    }
    return r;
}

}  // namespace kronoma
