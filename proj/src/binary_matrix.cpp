#include "kronoma/binary_matrix.hpp"

#include <algorithm>
#include <map>

#include "kronoma/errors.hpp"

namespace kronoma {

BinaryMatrix::BinaryMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw ConfigError("BinaryMatrix: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, 0);
}

BinaryMatrix::BinaryMatrix(std::initializer_list<std::initializer_list<int>> rows) {
    std::vector<std::vector<int>> v;
    for (const auto& r : rows) v.emplace_back(r);
    *this = from_rows(v);
}

BinaryMatrix BinaryMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty())
        throw ConfigError("BinaryMatrix: empty row list");
    BinaryMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < m.rows_; ++r) {
        if (static_cast<int>(rows[r].size()) != m.cols_)
            throw ConfigError("BinaryMatrix: ragged rows");
        for (int c = 0; c < m.cols_; ++c) {
            const int v = rows[r][c];
            if (v != 0 && v != 1) throw ConfigError("BinaryMatrix: entries must be 0 or 1");
            m.set(r, c, static_cast<std::uint8_t>(v));
        }
    }
    return m;
}

BinaryMatrix BinaryMatrix::from_column_masks(int rows, std::span<const std::uint64_t> masks) {
    BinaryMatrix m(rows, static_cast<int>(masks.size()));
    for (int c = 0; c < m.cols_; ++c)
        for (int r = 0; r < rows; ++r)
            m.set(r, c, static_cast<std::uint8_t>((masks[c] >> r) & 1u));
    return m;
}

BinaryMatrix BinaryMatrix::identity(int n) {
    BinaryMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

std::uint64_t BinaryMatrix::column_mask(int c) const {
    std::uint64_t mask = 0;
    for (int r = 0; r < rows_; ++r) mask |= static_cast<std::uint64_t>(at(r, c)) << r;
    return mask;
}

int BinaryMatrix::row_weight(int r) const {
    int w = 0;
    for (int c = 0; c < cols_; ++c) w += at(r, c);
    return w;
}

int BinaryMatrix::max_row_weight() const {
    int w = 0;
    for (int r = 0; r < rows_; ++r) w = std::max(w, row_weight(r));
    return w;
}

std::size_t BinaryMatrix::ones_count() const {
    std::size_t n = 0;
    for (const auto v : data_) n += v;
    return n;
}

std::string BinaryMatrix::to_text() const {
    std::string out;
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            out += at(r, c) ? '1' : '0';
            if (c + 1 < cols_) out += ' ';
        }
        out += '\n';
    }
    return out;
}

BinaryMatrix kronecker(const BinaryMatrix& a, const BinaryMatrix& b, std::size_t size_cap) {
    const std::size_t rows = static_cast<std::size_t>(a.rows()) * b.rows();
    const std::size_t cols = static_cast<std::size_t>(a.cols()) * b.cols();
    if (rows * cols > size_cap)
        throw InfeasibleError("kronecker: result " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " exceeds the size cap");
    BinaryMatrix out(static_cast<int>(rows), static_cast<int>(cols));
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            if (!a.at(i, j)) continue;
            for (int r = 0; r < b.rows(); ++r)
                for (int c = 0; c < b.cols(); ++c)
                    out.set(i * b.rows() + r, j * b.cols() + c, b.at(r, c));
        }
    return out;
}

BinaryMatrix kronecker_chain(std::span<const BinaryMatrix> factors, std::size_t size_cap) {
    if (factors.empty()) throw ConfigError("kronecker_chain: no factors");
    BinaryMatrix acc = factors[0];
    for (std::size_t i = 1; i < factors.size(); ++i) acc = kronecker(acc, factors[i], size_cap);
    return acc;
}

FactorValidity validate_factor(const BinaryMatrix& m) {
    FactorValidity report;
    std::map<std::uint64_t, int> seen;  // mask -> first column holding it (1-based)
    for (int c = 0; c < m.cols(); ++c) {
        const std::uint64_t mask = m.column_mask(c);
        if (mask == 0) {
            report.zero_columns.push_back(c + 1);
            continue;
        }
        if (auto it = seen.find(mask); it != seen.end())
            report.duplicate_columns.emplace_back(it->second, c + 1);
        else
            seen.emplace(mask, c + 1);
    }
    report.valid = report.zero_columns.empty() && report.duplicate_columns.empty();
    return report;
}

bool rows_linearly_independent(const BinaryMatrix& m) {
    if (m.rows() > m.cols()) return false;
    // Fraction-free Gaussian elimination over 128-bit integers; entries stay
    // small at factor dimensions (m <= ~8).
    using i128 = __int128;
    std::vector<std::vector<i128>> a(m.rows(), std::vector<i128>(m.cols()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) a[r][c] = m.at(r, c);
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int pivot = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (a[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        for (int r = rank + 1; r < m.rows(); ++r) {
            if (a[r][col] == 0) continue;
            const i128 f1 = a[rank][col], f2 = a[r][col];
            for (int c = col; c < m.cols(); ++c) a[r][c] = a[r][c] * f1 - a[rank][c] * f2;
        }
        ++rank;
    }
    return rank == m.rows();
}

}  // namespace kronoma
