#include "kronoma/pattern.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kronoma/errors.hpp"

namespace kronoma {

namespace {

std::string column_issues(const FactorValidity& v) {
    std::string out;
    for (int c : v.zero_columns) out += " zero column " + std::to_string(c) + ";";
    for (auto [a, b] : v.duplicate_columns)
        out += " duplicate columns " + std::to_string(a) + "," + std::to_string(b) + ";";
    return out;
}

}  // namespace

KroneckerPattern KroneckerPattern::build(std::vector<BinaryMatrix> rect_factors,
                                         std::vector<BinaryMatrix> square_factors,
                                         std::size_t size_cap) {
    KroneckerPattern p;
    long long m_total = 1, k_total = 1;
    auto account = [&](const BinaryMatrix& f) {
        m_total *= f.rows();
        k_total *= f.cols();
        if (static_cast<std::size_t>(m_total) * static_cast<std::size_t>(k_total) > size_cap)
            throw InfeasibleError("pattern: expanded dimensions exceed the size cap");
    };
    for (std::size_t i = 0; i < rect_factors.size(); ++i) {
        const auto& f = rect_factors[i];
        if (f.cols() <= f.rows())
            throw ConfigError("pattern: rectangular factor " + std::to_string(i + 1) +
                              " must have more columns than rows");
        // Zero columns are fatal (a user that never transmits).  Duplicate
        // columns are allowed here: they only make detection ambiguous, which
        // the detectors report, and wide factors with k > 2^m - 1 cannot
        // avoid them.
        if (const auto v = validate_factor(f); !v.zero_columns.empty())
            throw ConfigError("pattern: rectangular factor " + std::to_string(i + 1) +
                              " has zero columns:" + column_issues(v));
        account(f);
    }
    for (std::size_t i = 0; i < square_factors.size(); ++i) {
        const auto& f = square_factors[i];
        if (f.cols() != f.rows())
            throw ConfigError("pattern: square factor " + std::to_string(i + 1) +
                              " is not square");
        if (const auto v = validate_factor(f); !v.valid)
            throw ConfigError("pattern: square factor " + std::to_string(i + 1) +
                              " is not a valid pattern factor:" + column_issues(v));
        account(f);
        auto design = find_combining(f);
        if (!design)
            throw InfeasibleError("pattern: square factor " + std::to_string(i + 1) +
                                  " admits no combining matrix");
        p.square_.push_back(std::move(*design));
    }
    p.rect_ = std::move(rect_factors);
    return p;
}

long long KroneckerPattern::rect_rows() const {
    long long m = 1;
    for (const auto& f : rect_) m *= f.rows();
    return m;
}

long long KroneckerPattern::rect_cols() const {
    long long k = 1;
    for (const auto& f : rect_) k *= f.cols();
    return k;
}

long long KroneckerPattern::square_size() const {
    long long m = 1;
    for (const auto& d : square_) m *= d.dim();
    return m;
}

Rational KroneckerPattern::overload_factor() const {
    return Rational(total_cols(), total_rows());
}

BinaryMatrix KroneckerPattern::expand(std::size_t size_cap) const {
    std::vector<BinaryMatrix> factors = rect_;
    for (const auto& d : square_) factors.push_back(d.p);
    if (factors.empty()) throw ConfigError("pattern: no factors to expand");
    return kronecker_chain(factors, size_cap);
}

BinaryMatrix KroneckerPattern::rect_expand(std::size_t size_cap) const {
    if (rect_.empty()) return BinaryMatrix{{1}};
    return kronecker_chain(rect_, size_cap);
}

namespace {

BinaryMatrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError("pattern json: " + what + " must be a nonempty array of rows");
    std::vector<std::vector<int>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw ConfigError("pattern json: " + what + " rows must be arrays");
        rows.emplace_back();
        for (const auto& v : row) {
            if (!v.is_number_integer())
                throw ConfigError("pattern json: " + what + " entries must be 0/1 integers");
            rows.back().push_back(v.get<int>());
        }
    }
    return BinaryMatrix::from_rows(rows);
}

nlohmann::json matrix_to_json(const BinaryMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(static_cast<int>(m.at(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

KroneckerPattern pattern_from_json(const std::string& json_text, std::size_t size_cap) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pattern json: parse failure: ") + e.what());
    }
    std::vector<BinaryMatrix> rect, square;
    if (j.contains("rect"))
        for (const auto& f : j.at("rect")) rect.push_back(matrix_from_json(f, "rect factor"));
    if (j.contains("square"))
        for (const auto& f : j.at("square")) square.push_back(matrix_from_json(f, "square factor"));
    if (rect.empty() && square.empty())
        throw ConfigError("pattern json: needs at least one factor under \"rect\" or \"square\"");
    return KroneckerPattern::build(std::move(rect), std::move(square), size_cap);
}

KroneckerPattern load_pattern_file(const std::string& path, std::size_t size_cap) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read pattern file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return pattern_from_json(ss.str(), size_cap);
}

std::string pattern_to_json(const KroneckerPattern& pattern) {
    nlohmann::json j;
    j["rect"] = nlohmann::json::array();
    j["square"] = nlohmann::json::array();
    for (const auto& f : pattern.rect_factors()) j["rect"].push_back(matrix_to_json(f));
    for (const auto& d : pattern.square_designs()) j["square"].push_back(matrix_to_json(d.p));
    return j.dump(2);
}

}  // namespace kronoma
