#pragma once

// Finite domains {0,1}^n as explicit mass tables: distributions, bounded
// measures (capped sub-distributions) and joint distributions over a product
// X x Z flattened row-major with x in the high-order bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mml/common.hpp"

namespace mml {

/// Domain descriptor: the set {0,1}^bit_width.
struct FiniteDomain {
    int bit_width = 0;

    std::size_t size() const { return std::size_t{1} << bit_width; }

    static FiniteDomain of_bits(int n) {
        if (n < 0 || n > kMaxBits) throw invalid_parameter("FiniteDomain: bit_width out of range");
        return FiniteDomain{n};
    }
};

namespace detail {

inline void check_bits(int n) {
    if (n < 0 || n > kMaxBits) throw invalid_parameter("bit_width out of range");
}

inline double mass_sum(const std::vector<double>& m) {
    double s = 0.0;
    for (double v : m) s += v;
    return s;
}

}  // namespace detail

/// Probability distribution over {0,1}^n.  Mass is non-negative and sums to
/// one within kNormTol; values are stored exactly as given.
class FiniteDistribution {
public:
    FiniteDistribution(int bit_width, std::vector<double> mass)
        : bit_width_(bit_width), mass_(std::move(mass)) {
        detail::check_bits(bit_width_);
        if (mass_.size() != (std::size_t{1} << bit_width_))
            throw invalid_parameter("FiniteDistribution: mass table size != 2^bit_width");
        double s = 0.0;
        for (double v : mass_) {
            if (v < -kMassSlack) throw invalid_parameter("FiniteDistribution: negative mass");
            s += v;
        }
        if (std::abs(s - 1.0) > kNormTol)
            throw invalid_parameter("FiniteDistribution: mass sums to " + std::to_string(s));
    }

    static FiniteDistribution uniform(int bit_width) {
        detail::check_bits(bit_width);
        std::size_t n = std::size_t{1} << bit_width;
        return FiniteDistribution(bit_width, std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static FiniteDistribution point_mass(int bit_width, std::size_t x) {
        detail::check_bits(bit_width);
        std::size_t n = std::size_t{1} << bit_width;
        if (x >= n) throw invalid_parameter("point_mass: index out of domain");
        std::vector<double> m(n, 0.0);
        m[x] = 1.0;
        return FiniteDistribution(bit_width, std::move(m));
    }

    /// Flat distribution on an index set (uniform over the listed points).
    static FiniteDistribution flat_on(int bit_width, const std::vector<std::size_t>& support) {
        detail::check_bits(bit_width);
        if (support.empty()) throw zero_mass("flat_on: empty support");
        std::size_t n = std::size_t{1} << bit_width;
        std::vector<double> m(n, 0.0);
        for (std::size_t x : support) {
            if (x >= n) throw invalid_parameter("flat_on: index out of domain");
            m[x] += 1.0 / static_cast<double>(support.size());
        }
        return FiniteDistribution(bit_width, std::move(m));
    }

    int bit_width() const { return bit_width_; }
    std::size_t size() const { return mass_.size(); }
    double operator[](std::size_t x) const { return mass_[x]; }
    const std::vector<double>& mass() const { return mass_; }

    /// Pointwise convex mixture; domains must agree.
    static FiniteDistribution mix(double w, const FiniteDistribution& a, const FiniteDistribution& b) {
        if (a.bit_width_ != b.bit_width_) throw domain_mismatch("mix: domains differ");
        if (w < -kMassSlack || w > 1.0 + kMassSlack) throw invalid_parameter("mix: weight outside [0,1]");
        std::vector<double> m(a.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = w * a.mass_[i] + (1.0 - w) * b.mass_[i];
        return FiniteDistribution(a.bit_width_, std::move(m));
    }

private:
    int bit_width_;
    std::vector<double> mass_;
};

/// Sub-distribution capped pointwise by a distribution: 0 <= mass[x] <= cap[x]
/// and total() >= threshold.  Models a conditional slice "cap given event".
struct BoundedMeasure {
    std::vector<double> mass;
    FiniteDistribution cap;
    double threshold = 0.0;

    BoundedMeasure(std::vector<double> m, FiniteDistribution c, double thr)
        : mass(std::move(m)), cap(std::move(c)), threshold(thr) {
        if (mass.size() != cap.size()) throw domain_mismatch("BoundedMeasure: mass/cap size differ");
        for (std::size_t i = 0; i < mass.size(); ++i) {
            if (mass[i] < -kMassSlack) throw invalid_parameter("BoundedMeasure: negative mass");
            if (mass[i] > cap[i] + kMassSlack) throw invalid_parameter("BoundedMeasure: mass exceeds cap");
        }
        if (total() < threshold - kNormTol)
            throw invalid_parameter("BoundedMeasure: total below threshold");
    }

    double total() const { return detail::mass_sum(mass); }

    int bit_width() const { return cap.bit_width(); }
};

/// Renormalizes a raw non-negative mass table to sum one.
inline std::vector<double> normalize_mass(const std::vector<double>& m) {
    double s = 0.0;
    for (double v : m) {
        if (v < -kMassSlack) throw invalid_parameter("normalize_mass: negative entry");
        s += v;
    }
    if (s <= 0.0) throw zero_mass("normalize_mass: zero total");
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] / s;
    return out;
}

/// The conditional distribution a bounded measure represents.
inline FiniteDistribution normalize_measure(const BoundedMeasure& m) {
    return FiniteDistribution(m.bit_width(), normalize_mass(m.mass));
}

/// Min-entropy in bits: -log2 of the heaviest atom.
inline double min_entropy(const FiniteDistribution& x) {
    double mx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx = std::max(mx, x[i]);
    if (mx <= 0.0) throw zero_mass("min_entropy: zero distribution");
    return -std::log2(mx);
}

/// Joint distribution over X x Z; the flattened index is x * 2^z_bits + z.
class JointDistribution {
public:
    JointDistribution(int x_bits, int z_bits, std::vector<double> mass)
        : x_bits_(x_bits), z_bits_(z_bits),
          flat_(x_bits + z_bits, std::move(mass)) {
        detail::check_bits(x_bits);
        detail::check_bits(z_bits);
        detail::check_bits(x_bits + z_bits);
    }

    static JointDistribution independent(const FiniteDistribution& x, const FiniteDistribution& z) {
        std::vector<double> m;
        m.reserve(x.size() * z.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < z.size(); ++j) m.push_back(x[i] * z[j]);
        return JointDistribution(x.bit_width(), z.bit_width(), std::move(m));
    }

    int x_bits() const { return x_bits_; }
    int z_bits() const { return z_bits_; }
    std::size_t x_size() const { return std::size_t{1} << x_bits_; }
    std::size_t z_size() const { return std::size_t{1} << z_bits_; }

    double at(std::size_t x, std::size_t z) const { return flat_[(x << z_bits_) | z]; }

    /// The joint viewed as a distribution over the flattened product domain.
    const FiniteDistribution& flattened() const { return flat_; }

    FiniteDistribution marginal_x() const {
        std::vector<double> m(x_size(), 0.0);
        for (std::size_t x = 0; x < x_size(); ++x)
            for (std::size_t z = 0; z < z_size(); ++z) m[x] += at(x, z);
        return FiniteDistribution(x_bits_, std::move(m));
    }

    FiniteDistribution marginal_z() const {
        std::vector<double> m(z_size(), 0.0);
        for (std::size_t x = 0; x < x_size(); ++x)
            for (std::size_t z = 0; z < z_size(); ++z) m[z] += at(x, z);
        return FiniteDistribution(z_bits_, std::move(m));
    }

    /// Conditional X | Z = z; zero_mass if the slice has no weight.
    FiniteDistribution conditional_x(std::size_t z) const {
        std::vector<double> m(x_size(), 0.0);
        for (std::size_t x = 0; x < x_size(); ++x) m[x] = at(x, z);
        return FiniteDistribution(x_bits_, normalize_mass(m));
    }

private:
    int x_bits_, z_bits_;
    FiniteDistribution flat_;
};

}  // namespace mml
