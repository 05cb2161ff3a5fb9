// kron-noma: design, analysis and simulation front end for Kronecker-factored
// code-domain NOMA patterns.  One subcommand per run; SNR flags are in dB and
// converted once at this boundary (rho = 10^(dB/10)).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kronoma/errors.hpp"
#include "kronoma/gen_detect.hpp"
#include "kronoma/metrics.hpp"
#include "kronoma/pattern.hpp"
#include "kronoma/search_space.hpp"
#include "kronoma/sim.hpp"
#include "kronoma/sq_detect.hpp"

namespace {

using nlohmann::json;
using namespace kronoma;

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<double> parse_snr_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream ss(spec);
        if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw ConfigError("--snr-db expects a:b:step with step > 0: " + spec);
        for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw ConfigError("--snr-db: empty grid");
    return out;
}

std::vector<int> parse_user_list(const std::string& spec) {
    std::vector<int> out;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << content;
}

json matrix_json(const BinaryMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(static_cast<int>(m.at(r, c)));
        rows.push_back(row);
    }
    return rows;
}

json design_json(const SquareFactorDesign& d) {
    json j;
    j["p"] = matrix_json(d.p);
    json alpha = json::array();
    for (int r = 0; r < d.dim(); ++r) {
        json row = json::array();
        for (int c = 0; c < d.dim(); ++c) row.push_back(d.alpha_at(r, c));
        alpha.push_back(row);
    }
    j["alpha"] = alpha;
    j["weights"] = d.weights;
    json gains = json::array();
    for (const auto& g : d.gains) gains.push_back(g.str());
    j["gains"] = gains;
    return j;
}

std::string design_text(const SquareFactorDesign& d) {
    std::string out = "P:\n" + d.p.to_text() + "alpha:\n";
    for (int r = 0; r < d.dim(); ++r) {
        for (int c = 0; c < d.dim(); ++c) {
            const int v = d.alpha_at(r, c);
            out += (v < 0 ? "" : " ") + std::to_string(v);
            if (c + 1 < d.dim()) out += ' ';
        }
        out += '\n';
    }
    out += "weights:";
    for (int w : d.weights) out += ' ' + std::to_string(w);
    out += "\ngains:";
    for (const auto& g : d.gains) out += ' ' + g.str();
    out += '\n';
    return out;
}

DesignCriterion parse_criterion(const std::string& s, double& rho) {
    if (s == "minmax") return DesignCriterion::MaxMinGain;
    if (s == "product") return DesignCriterion::GainProduct;
    if (s.rfind("sumrate", 0) == 0) {
        double rho_db = 0;
        if (s.size() > 7) {
            if (s[7] != ':') throw ConfigError("--criterion: expected sumrate:<rho_db>");
            rho_db = std::stod(s.substr(8));
        }
        rho = snr_db_to_rho(rho_db);
        return DesignCriterion::SumRate;
    }
    throw ConfigError("--criterion must be minmax, product, or sumrate:<rho_db>");
}

int threads_from_env(int flag_value) {
    if (const char* env = std::getenv("KRON_NOMA_THREADS")) return std::atoi(env);
    return flag_value;
}

// ---- subcommand bodies ----------------------------------------------------

int cmd_design(int m, const std::string& criterion, const std::string& out_path) {
    double rho = 1.0;
    const DesignCriterion crit = parse_criterion(criterion, rho);
    const SquareFactorDesign d = select_optimal_square(m, crit, rho);
    json j = design_json(d);
    j["m"] = m;
    j["criterion"] = criterion;
    write_output(out_path, j.dump(2) + "\n" + design_text(d));
    return 0;
}

int cmd_validate(const std::string& pattern_path) {
    std::ifstream in(pattern_path);
    if (!in) throw ConfigError("cannot read pattern file: " + pattern_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    json spec = json::parse(ss.str(), nullptr, false);
    if (spec.is_discarded()) throw ConfigError("pattern json: parse failure");
    json report;
    bool all_valid = true;
    for (const char* kind : {"rect", "square"}) {
        report[kind] = json::array();
        if (!spec.contains(kind)) continue;
        for (const auto& jm : spec.at(kind)) {
            std::vector<std::vector<int>> rows;
            for (const auto& row : jm) rows.push_back(row.get<std::vector<int>>());
            const BinaryMatrix m = BinaryMatrix::from_rows(rows);
            const FactorValidity v = validate_factor(m);
            json r;
            r["rows"] = m.rows();
            r["cols"] = m.cols();
            r["valid"] = v.valid;
            r["zero_columns"] = v.zero_columns;
            json dups = json::array();
            for (auto [a, b] : v.duplicate_columns) dups.push_back({a, b});
            r["duplicate_columns"] = dups;
            report[kind].push_back(r);
            all_valid = all_valid && v.valid;
        }
    }
    report["valid"] = all_valid;
    std::cout << report.dump(2) << "\n";
    return all_valid ? 0 : 2;
}

int cmd_expand(const std::string& pattern_path, const std::string& out_path) {
    const KroneckerPattern p = load_pattern_file(pattern_path);
    const BinaryMatrix g = p.expand();
    json j;
    j["rows"] = g.rows();
    j["cols"] = g.cols();
    j["beta"] = p.overload_factor().str();
    j["matrix"] = matrix_json(g);
    write_output(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_searchspace(const std::string& factors) {
    std::vector<std::pair<int, int>> dims;
    std::istringstream ss(factors);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto x = tok.find('x');
        if (x == std::string::npos) throw ConfigError("--factors expects MxK entries: " + tok);
        dims.emplace_back(std::stoi(tok.substr(0, x)), std::stoi(tok.substr(x + 1)));
    }
    if (dims.empty()) throw ConfigError("--factors: empty list");
    std::cout << factorized_search_space(dims).str() << "\n";
    return 0;
}

int cmd_sumrate(const std::string& pattern_path, const std::string& snr_spec,
                const std::string& sic_path, const std::string& label,
                const std::string& out_path) {
    const KroneckerPattern p = load_pattern_file(pattern_path);
    const auto grid = parse_snr_grid(snr_spec);
    std::vector<Rational> gains;
    if (!sic_path.empty()) gains = sic_revised_gains(p, load_sic_policy_file(sic_path));
    std::string scheme = label;
    if (scheme.empty()) {
        scheme = pattern_path;
        if (const auto slash = scheme.find_last_of('/'); slash != std::string::npos)
            scheme = scheme.substr(slash + 1);
        if (const auto dot = scheme.find_last_of('.'); dot != std::string::npos)
            scheme = scheme.substr(0, dot);
        if (!sic_path.empty()) scheme += "+sic";
    }
    std::string csv = "snr_db,rate_bits_per_re,scheme_label\n";
    for (double db : grid) {
        const double rho = snr_db_to_rho(db);
        const double rate = gains.empty() ? sum_rate_general(p, rho)
                                          : sum_rate_with_gains(p, rho, gains);
        csv += fmt_g(db) + "," + fmt_g(rate) + "," + scheme + "\n";
    }
    write_output(out_path, csv);
    return 0;
}

int cmd_latency(const std::string& pattern_path, double t_add, const std::string& mod) {
    const KroneckerPattern p = load_pattern_file(pattern_path);
    CostModel cost = CostModel::brute_force_map();
    cost.t_add = t_add;
    json j;
    j["latency_units"] = latency_worst_case(p, Constellation::by_name(mod), cost);
    j["t_add"] = t_add;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_complexity(const std::string& pattern_path, const std::string& mod) {
    const KroneckerPattern p = load_pattern_file(pattern_path);
    const Constellation base = Constellation::by_name(mod);
    const OpCounts ops = op_counts(p, base);
    json j;
    j["adds"] = ops.adds;
    j["muls"] = ops.muls;
    if (p.pure_rect()) {
        const SearchSpaceCounts counts = map_search_space(p, base);
        j["map_search_space"]["recursive"] = counts.recursive.str();
        j["map_search_space"]["direct"] = counts.direct.str();
    }
    json rows = json::array();
    for (const auto& row : table1_estimates(p)) {
        json r;
        r["algorithm"] = row.algorithm;
        r["adds"] = row.adds;
        r["muls"] = row.muls;
        rows.push_back(r);
    }
    j["asymptotic"] = rows;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_detect(const std::string& pattern_path, const std::string& input_path,
               const std::string& mod, double noise_var, const std::string& sic_path,
               const std::string& sic_mode, bool fallback, const std::string& out_path) {
    const KroneckerPattern p = load_pattern_file(pattern_path);
    std::ifstream in(input_path);
    if (!in) throw ConfigError("cannot read input file: " + input_path);
    json ji = json::parse(in, nullptr, false);
    if (ji.is_discarded() || !ji.contains("y"))
        throw ConfigError("detect input must be JSON with a \"y\" array");
    const std::vector<double> y = ji.at("y").get<std::vector<double>>();
    const Constellation base = Constellation::by_name(mod);
    DetectOptions opts;
    opts.fallback_nearest = fallback;
    GeneralDetection det;
    if (!sic_path.empty()) {
        const SicPolicy policy = load_sic_policy_file(sic_path);
        if (sic_mode == "genie")
            throw ConfigError("detect: genie mode needs true symbols; use the ber command");
        det = detect_with_sic(y, p, base, noise_var, policy, SicMode::Imperfect, {}, opts);
    } else {
        det = detect_general(y, p, base, noise_var, opts);
    }
    json j;
    j["status"] = det.status == DetectStatus::Ok
                      ? "ok"
                      : (det.status == DetectStatus::Ambiguous ? "ambiguous" : "infeasible");
    if (!det.failure.empty()) j["failure"] = det.failure;
    j["symbols"] = det.symbols;
    json gains = json::array();
    for (const auto& g : det.path_gains) gains.push_back(g.str());
    j["path_gains"] = gains;
    j["combine_adds"] = det.combine_adds;
    j["mud_candidates"] = det.mud_candidates;
    write_output(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_ber(const std::string& pattern_path, const std::string& mod,
            const std::string& snr_spec, std::uint64_t trials, std::uint64_t seed,
            const std::string& users, const std::string& sic_path, const std::string& sic_mode,
            int threads, const std::string& downlink_path, const std::string& uplink_path,
            const std::string& out_path) {
    SimConfig cfg;
    cfg.pattern = load_pattern_file(pattern_path);
    cfg.base = Constellation::by_name(mod);
    cfg.snr_db = parse_snr_grid(snr_spec);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.threads = threads_from_env(threads);
    if (!users.empty()) cfg.tracked_users = parse_user_list(users);
    if (!sic_path.empty()) {
        cfg.sic = load_sic_policy_file(sic_path);
        if (sic_mode == "genie")
            cfg.sic_mode = SicMode::Genie;
        else if (sic_mode == "imperfect")
            cfg.sic_mode = SicMode::Imperfect;
        else
            throw ConfigError("--sic-mode must be imperfect or genie");
    }
    auto load_gains = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read fading file: " + path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("h"))
            throw ConfigError("fading file must be JSON with an \"h\" array");
        return j.at("h").get<std::vector<double>>();
    };
    if (!downlink_path.empty()) {
        cfg.fading.kind = FadingConfig::Kind::Downlink;
        cfg.fading.gains = load_gains(downlink_path);
    } else if (!uplink_path.empty()) {
        cfg.fading.kind = FadingConfig::Kind::Uplink;
        cfg.fading.gains = load_gains(uplink_path);
    }
    const BerResult r = simulate_ber(cfg);
    write_output(out_path, ber_csv(r));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker-factored code-domain NOMA toolkit"};
    app.require_subcommand(1);

    // design
    auto* design = app.add_subcommand("design", "search the optimal square factor for one dimension");
    int design_m = 3;
    std::string design_criterion = "sumrate:0", design_out;
    design->add_option("--m", design_m, "factor dimension")->required();
    design->add_option("--criterion", design_criterion,
                       "minmax | sumrate:<rho_db> | product (default sumrate:0)");
    design->add_option("--out", design_out, "write output to a file instead of stdout");

    // validate
    auto* validate = app.add_subcommand("validate", "check pattern-factor column conditions");
    std::string validate_pattern;
    validate->add_option("--pattern", validate_pattern, "pattern spec JSON")->required();

    // expand
    auto* expand = app.add_subcommand("expand", "expand a factored pattern to the full matrix");
    std::string expand_pattern, expand_out;
    expand->add_option("--pattern", expand_pattern, "pattern spec JSON")->required();
    expand->add_option("--out", expand_out, "output file");

    // searchspace
    auto* searchspace = app.add_subcommand("searchspace", "count candidate factor matrices");
    std::string searchspace_factors;
    searchspace->add_option("--factors", searchspace_factors, "comma list of MxK dims")->required();

    // sumrate
    auto* sumrate = app.add_subcommand("sumrate", "analytic per-RE average sum rate over an SNR grid");
    std::string sr_pattern, sr_snr, sr_sic, sr_label, sr_out;
    sumrate->add_option("--pattern", sr_pattern, "pattern spec JSON")->required();
    sumrate->add_option("--snr-db", sr_snr, "a:b:step or comma list")->required();
    sumrate->add_option("--sic", sr_sic, "SIC policy JSON (revised gains)");
    sumrate->add_option("--label", sr_label, "scheme label for the CSV");
    sumrate->add_option("--out", sr_out, "CSV output file");

    // latency
    auto* latency = app.add_subcommand("latency", "worst-case detection latency");
    std::string lat_pattern, lat_mod = "bpsk";
    double lat_tadd = 1.0;
    latency->add_option("--pattern", lat_pattern, "pattern spec JSON")->required();
    latency->add_option("--t-add", lat_tadd, "time units per addition");
    latency->add_option("--mod", lat_mod, "bpsk | qpsk");

    // complexity
    auto* complexity = app.add_subcommand("complexity", "operation counts and MAP search spaces");
    std::string cx_pattern, cx_mod = "bpsk";
    complexity->add_option("--pattern", cx_pattern, "pattern spec JSON")->required();
    complexity->add_option("--mod", cx_mod, "bpsk | qpsk");

    // detect
    auto* detect = app.add_subcommand("detect", "run the recursive detector on one observation");
    std::string dt_pattern, dt_input, dt_mod = "bpsk", dt_sic, dt_sic_mode = "imperfect", dt_out;
    double dt_noise = 0.0;
    bool dt_fallback = false;
    detect->add_option("--pattern", dt_pattern, "pattern spec JSON")->required();
    detect->add_option("--input", dt_input, "JSON file with a \"y\" array")->required();
    detect->add_option("--mod", dt_mod, "bpsk | qpsk");
    detect->add_option("--noise-var", dt_noise, "noise variance (0 = noiseless)");
    detect->add_option("--sic", dt_sic, "SIC policy JSON");
    detect->add_option("--sic-mode", dt_sic_mode, "imperfect | genie");
    detect->add_flag("--fallback", dt_fallback, "resolve infeasible systems by nearest match");
    detect->add_option("--out", dt_out, "output file");

    // ber
    auto* ber = app.add_subcommand("ber", "Monte-Carlo bit error rate simulation");
    std::string ber_pattern, ber_mod = "bpsk", ber_snr, ber_users, ber_sic,
                ber_sic_mode = "imperfect", ber_down, ber_up, ber_out;
    std::uint64_t ber_trials = 1'000'000, ber_seed = 1;
    int ber_threads = 0;
    ber->add_option("--pattern", ber_pattern, "pattern spec JSON")->required();
    ber->add_option("--mod", ber_mod, "bpsk | qpsk");
    ber->add_option("--snr-db", ber_snr, "a:b:step or comma list")->required();
    ber->add_option("--trials", ber_trials, "trials per SNR point");
    ber->add_option("--seed", ber_seed, "RNG seed (fixed seed => byte-identical CSV)");
    ber->add_option("--users", ber_users, "comma list of tracked users (default all)");
    ber->add_option("--sic", ber_sic, "SIC policy JSON");
    ber->add_option("--sic-mode", ber_sic_mode, "imperfect | genie");
    ber->add_option("--threads", ber_threads,
                    "worker thread hint (KRON_NOMA_THREADS overrides)");
    ber->add_option("--downlink-h", ber_down, "JSON file with per-RE gains");
    ber->add_option("--uplink-h", ber_up, "JSON file with per-user gains");
    ber->add_option("--out", ber_out, "CSV output file");

    try {
        app.parse(argc, argv);
        if (design->parsed()) return cmd_design(design_m, design_criterion, design_out);
        if (validate->parsed()) return cmd_validate(validate_pattern);
        if (expand->parsed()) return cmd_expand(expand_pattern, expand_out);
        if (searchspace->parsed()) return cmd_searchspace(searchspace_factors);
        if (sumrate->parsed()) return cmd_sumrate(sr_pattern, sr_snr, sr_sic, sr_label, sr_out);
        if (latency->parsed()) return cmd_latency(lat_pattern, lat_tadd, lat_mod);
        if (complexity->parsed()) return cmd_complexity(cx_pattern, cx_mod);
        if (detect->parsed())
            return cmd_detect(dt_pattern, dt_input, dt_mod, dt_noise, dt_sic, dt_sic_mode,
                              dt_fallback, dt_out);
        if (ber->parsed())
            return cmd_ber(ber_pattern, ber_mod, ber_snr, ber_trials, ber_seed, ber_users,
                           ber_sic, ber_sic_mode, ber_threads, ber_down, ber_up, ber_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
