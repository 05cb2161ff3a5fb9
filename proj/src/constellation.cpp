#include "kronoma/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kronoma/errors.hpp"

namespace kronoma {

bool Constellation::is_real() const {
    for (const auto& p : points)
        if (p.imag() != 0.0) return false;
    return true;
}

std::vector<double> Constellation::real_points() const {
    if (!is_real()) throw ConfigError("constellation " + name + " is not real-valued");
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].real();
    return out;
}

Constellation Constellation::bpsk(double power) {
    const double a = std::sqrt(power);
    Constellation c;
    c.name = "bpsk";
    c.points = {{-a, 0.0}, {+a, 0.0}};
    c.labels = {1, 0};
    c.bits_per_symbol = 1;
    return c;
}

Constellation Constellation::qpsk(double power) {
    const double a = std::sqrt(power / 2.0);
    Constellation c;
    c.name = "qpsk";
    // Gray map: first bit from the real part, second from the imaginary part.
    c.points = {{+a, +a}, {-a, +a}, {-a, -a}, {+a, -a}};
    c.labels = {0b00, 0b10, 0b11, 0b01};
    c.bits_per_symbol = 2;
    return c;
}

Constellation Constellation::by_name(const std::string& name, double power) {
    if (name == "bpsk") return bpsk(power);
    if (name == "qpsk") return qpsk(power);
    throw ConfigError("unknown constellation: " + name);
}

int Constellation::nearest_real(double v, double scale) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = std::abs(v - scale * points[i].real());
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

namespace {

double merge_tolerance(std::span<const double> pts) {
    double mx = 1.0;
    for (double p : pts) mx = std::max(mx, std::abs(p));
    return 1e-9 * mx;
}

}  // namespace

SumsetConstellation sumset(std::span<const double> base_points, int order, bool with_preimages) {
    if (order < 1) throw ConfigError("sumset: order must be >= 1");
    if (base_points.empty()) throw ConfigError("sumset: empty base");
    // Multisets of base indices: combinations with repetition.
    std::vector<std::pair<double, std::vector<int>>> sums;
    std::vector<int> tuple(order, 0);
    for (;;) {
        double s = 0;
        for (int t : tuple) s += base_points[t];
        sums.emplace_back(s, tuple);
        int j = order - 1;
        while (j >= 0 && tuple[j] == static_cast<int>(base_points.size()) - 1) --j;
        if (j < 0) break;
        const int v = tuple[j] + 1;
        for (int t = j; t < order; ++t) tuple[t] = v;
    }
    std::sort(sums.begin(), sums.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double tol = merge_tolerance(base_points) * order;
    SumsetConstellation out;
    out.order = order;
    for (auto& [value, pre] : sums) {
        if (out.points.empty() || value - out.points.back() > tol) {
            out.points.push_back(value);
            if (with_preimages) out.preimages.emplace_back();
        }
        if (with_preimages) out.preimages.back().push_back(pre);
    }
    return out;
}

std::size_t sumset_cardinality(std::span<const std::complex<double>> base_points, int order) {
    if (order < 1) throw ConfigError("sumset_cardinality: order must be >= 1");
    double mx = 1.0;
    for (const auto& p : base_points) mx = std::max(mx, std::abs(p));
    const double tol = 1e-9 * mx * order;
    std::vector<std::complex<double>> sums;
    std::vector<int> tuple(order, 0);
    for (;;) {
        std::complex<double> s = 0;
        for (int t : tuple) s += base_points[t];
        sums.push_back(s);
        int j = order - 1;
        while (j >= 0 && tuple[j] == static_cast<int>(base_points.size()) - 1) --j;
        if (j < 0) break;
        const int v = tuple[j] + 1;
        for (int t = j; t < order; ++t) tuple[t] = v;
    }
    std::sort(sums.begin(), sums.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::size_t count = 0;
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (i == 0 || std::abs(sums[i] - sums[i - 1]) > tol) ++count;
    return count;
}

}  // namespace kronoma
