#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kronoma {

/// Finite symbol alphabet with bit labels.  Detection runs on real-valued
/// signals; QPSK is supported by Gray-splitting each complex symbol into two
/// independent real half-symbols at the simulator boundary, so only the
/// complex point set is kept here for cardinality arithmetic.
struct Constellation {
    std::string name;
    std::vector<std::complex<double>> points;
    std::vector<std::uint32_t> labels;
    int bits_per_symbol = 1;

    std::size_t size() const { return points.size(); }
    bool is_real() const;
    std::vector<double> real_points() const;  // throws ConfigError when not real

    /// Points -a, +a with labels 1, 0 and a = sqrt(power).
    static Constellation bpsk(double power = 1.0);
    /// Gray-labelled points (+-a, +-a) with a = sqrt(power/2).
    static Constellation qpsk(double power = 1.0);
    static Constellation by_name(const std::string& name, double power = 1.0);

    /// Nearest point to v/scale; scale is the accumulated singleton weight.
    int nearest_real(double v, double scale) const;
};

/// All values expressible as a sum of `order` base points, collapsed by
/// multiplicity.  Points are sorted; preimage tuples (sorted base-index
/// multisets) are kept only when requested.
struct SumsetConstellation {
    int order = 1;
    std::vector<double> points;
    std::vector<std::vector<std::vector<int>>> preimages;  // per point, when materialized
};

SumsetConstellation sumset(std::span<const double> base_points, int order,
                           bool with_preimages = false);

/// Cardinality of the order-fold sumset of an arbitrary complex alphabet
/// (complexity accounting; nothing is ever detected over this set).
std::size_t sumset_cardinality(std::span<const std::complex<double>> base_points, int order);

}  // namespace kronoma
