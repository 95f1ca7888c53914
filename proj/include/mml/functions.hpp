#pragma once

// Test functions (distinguishers/predictors) over {0,1}^n as explicit value
// tables, and finite convex combinations of them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/domain.hpp"

namespace mml {

/// Declared range of a test function's values.
enum class ValueRange { unit, signed_unit };  // [0,1] or [-1,1]

inline double range_lo(ValueRange r) { return r == ValueRange::unit ? 0.0 : -1.0; }
inline double range_hi(ValueRange) { return 1.0; }

inline std::string range_label(ValueRange r) { return r == ValueRange::unit ? "[0,1]" : "[-1,1]"; }

inline ValueRange range_from_label(const std::string& s) {
    if (s == "[0,1]") return ValueRange::unit;
    if (s == "[-1,1]") return ValueRange::signed_unit;
    throw parse_error("unknown range label: " + s);
}

/// Bounded real-valued function on {0,1}^n with a complexity weight
/// (uniform-cost convention: 1 unless the caller says otherwise).
class TestFunction {
public:
    TestFunction(int bit_width, ValueRange range, std::vector<double> values, double complexity = 1.0)
        : bit_width_(bit_width), range_(range), complexity_(complexity), values_(std::move(values)) {
        detail::check_bits(bit_width_);
        if (values_.size() != (std::size_t{1} << bit_width_))
            throw invalid_parameter("TestFunction: value table size != 2^bit_width");
        const double lo = range_lo(range_), hi = range_hi(range_);
        for (double v : values_)
            if (v < lo - kMassSlack || v > hi + kMassSlack)
                throw invalid_parameter("TestFunction: value outside declared range");
        if (complexity_ <= 0.0) throw invalid_parameter("TestFunction: non-positive complexity");
    }

    static TestFunction constant(int bit_width, ValueRange range, double v) {
        return TestFunction(bit_width, range, std::vector<double>(std::size_t{1} << bit_width, v));
    }

    /// 0/1 indicator of an index set.
    static TestFunction indicator(int bit_width, const std::vector<std::size_t>& support) {
        std::vector<double> v(std::size_t{1} << bit_width, 0.0);
        for (std::size_t x : support) {
            if (x >= v.size()) throw invalid_parameter("indicator: index out of domain");
            v[x] = 1.0;
        }
        return TestFunction(bit_width, ValueRange::unit, std::move(v));
    }

    int bit_width() const { return bit_width_; }
    ValueRange range() const { return range_; }
    double complexity() const { return complexity_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t x) const { return values_[x]; }
    const std::vector<double>& values() const { return values_; }

    /// Range complement: 1-a on [0,1], -a on [-1,1].  In every payoff mode the
    /// complement's advantage is the negation of the original's.
    TestFunction complement() const {
        std::vector<double> v(values_.size());
        if (range_ == ValueRange::unit)
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 - values_[i];
        else
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = -values_[i];
        return TestFunction(bit_width_, range_, std::move(v), complexity_);
    }

    double expectation(const FiniteDistribution& x) const {
        if (x.bit_width() != bit_width_) throw domain_mismatch("expectation: domains differ");
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) s += x[i] * values_[i];
        return s;
    }

private:
    int bit_width_;
    ValueRange range_;
    double complexity_;
    std::vector<double> values_;
};

/// Convex combination of test functions over a common domain and range.
/// Complexity convention: the support size (number of non-zero weights).
struct MixedStrategy {
    std::vector<double> weights;
    std::vector<TestFunction> components;

    MixedStrategy(std::vector<double> w, std::vector<TestFunction> c)
        : weights(std::move(w)), components(std::move(c)) {
        if (weights.size() != components.size())
            throw invalid_parameter("MixedStrategy: weight/component count differ");
        if (components.empty()) throw empty_class("MixedStrategy: no components");
        double s = 0.0;
        for (double v : weights) {
            if (v < -kMassSlack) throw invalid_parameter("MixedStrategy: negative weight");
            s += v;
        }
        if (std::abs(s - 1.0) > kNormTol)
            throw invalid_parameter("MixedStrategy: weights sum to " + std::to_string(s));
        for (const auto& f : components) {
            if (f.bit_width() != components.front().bit_width())
                throw domain_mismatch("MixedStrategy: mixed domains");
            if (f.range() != components.front().range())
                throw invalid_parameter("MixedStrategy: mixed ranges");
        }
    }

    static MixedStrategy pure(TestFunction f) {
        return MixedStrategy({1.0}, {std::move(f)});
    }

    int bit_width() const { return components.front().bit_width(); }
    ValueRange range() const { return components.front().range(); }

    /// Support size = complexity of the combination.
    std::size_t support() const {
        std::size_t n = 0;
        for (double w : weights)
            if (w > 0.0) ++n;
        return n;
    }

    /// Pointwise weighted average as a single function (payoffs are affine in
    /// the strategy, so evaluating the average is exact).
    TestFunction collapse() const {
        std::vector<double> v(components.front().size(), 0.0);
        for (std::size_t i = 0; i < components.size(); ++i) {
            if (weights[i] == 0.0) continue;
            const auto& c = components[i].values();
            for (std::size_t x = 0; x < v.size(); ++x) v[x] += weights[i] * c[x];
        }
        return TestFunction(bit_width(), range(), std::move(v));
    }
};

/// Class with every member's complement appended (order preserved).
inline std::vector<TestFunction> with_complements(const std::vector<TestFunction>& cls) {
    std::vector<TestFunction> out = cls;
    out.reserve(2 * cls.size());
    for (const auto& a : cls) out.push_back(a.complement());
    return out;
}

/// L_p norm of a value table under a distribution; p = infinity gives the
/// max over the distribution's support.
inline double lp_norm(const std::vector<double>& values, double p, const FiniteDistribution& nu) {
    if (values.size() != nu.size()) throw domain_mismatch("lp_norm: size mismatch");
    if (!(p >= 1.0)) throw invalid_exponent("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (nu[i] > 0.0) mx = std::max(mx, std::abs(values[i]));
        return mx;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (nu[i] > 0.0) s += nu[i] * std::pow(std::abs(values[i]), p);
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const TestFunction& f, double p, const FiniteDistribution& nu) {
    return lp_norm(f.values(), p, nu);
}

/// L_p distance between two value tables under a distribution.
inline double lp_distance(const std::vector<double>& a, const std::vector<double>& b, double p,
                          const FiniteDistribution& nu) {
    if (a.size() != b.size()) throw domain_mismatch("lp_distance: size mismatch");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return lp_norm(d, p, nu);
}

inline double lp_distance(const TestFunction& a, const TestFunction& b, double p,
                          const FiniteDistribution& nu) {
    return lp_distance(a.values(), b.values(), p, nu);
}

}  // namespace mml
