#pragma once

// Constraint sets for the constrained player of the zero-sum games.  All
// distribution-shaped sets are pointwise-capped simplices
//
//   density(eps, ref):                 x(i) <= ref(i)/eps     (slices of ref with mass >= eps)
//   minentropy(k):                     x(i) <= 2^-k
//   conditioned_minentropy(k, eps):    x(i) <= 2^-k/(1-eps)   (min-entropy-k source given an event
//                                                              of probability >= 1-eps)
//   dense(delta, ref):                 x(i) <= ref(i)/delta
//
// whose exact best responses are greedy cap fills with one fractional atom.
// The kernels tag (convex hull of simulator kernels) is resolved by the
// kernel oracle in simulator.hpp; it has no distribution caps.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/kernel.hpp"
#include "mml/payoff.hpp"

namespace mml {

enum class Orientation { minimize, maximize };

class ConstraintSet {
public:
    enum class Tag { density, minentropy, conditioned_minentropy, dense, kernels };

    static ConstraintSet density(double eps, FiniteDistribution reference) {
        if (!(eps > 0.0) || eps > 1.0 + kMassSlack)
            throw invalid_parameter("density: eps must lie in (0,1]");
        ConstraintSet c(Tag::density, reference.bit_width());
        c.eps_ = eps;
        c.reference_ = std::move(reference);
        return c;
    }

    static ConstraintSet minentropy(int bit_width, double k) {
        detail::check_bits(bit_width);
        if (k < 0.0) throw invalid_parameter("minentropy: k must be >= 0");
        if (k > bit_width + kNormTol)
            throw infeasible_constraint("minentropy: k exceeds domain bits");
        ConstraintSet c(Tag::minentropy, bit_width);
        c.k_ = k;
        return c;
    }

    static ConstraintSet conditioned_minentropy(int bit_width, double k, double eps) {
        detail::check_bits(bit_width);
        if (k < 0.0) throw invalid_parameter("conditioned_minentropy: k must be >= 0");
        if (eps < 0.0 || eps >= 1.0) throw invalid_parameter("conditioned_minentropy: eps must lie in [0,1)");
        if (std::exp2(bit_width - k) / (1.0 - eps) < 1.0 - kNormTol)
            throw infeasible_constraint("conditioned_minentropy: caps sum below 1");
        ConstraintSet c(Tag::conditioned_minentropy, bit_width);
        c.k_ = k;
        c.eps_ = eps;
        return c;
    }

    static ConstraintSet dense(double delta, FiniteDistribution reference) {
        if (!(delta > 0.0) || delta > 1.0 + kMassSlack)
            throw invalid_parameter("dense: delta must lie in (0,1]");
        ConstraintSet c(Tag::dense, reference.bit_width());
        c.eps_ = delta;
        c.reference_ = std::move(reference);
        return c;
    }

    /// Convex hull of simulator kernels on x_bits -> z_bits.  An empty base
    /// means the full kernel space (hull of all deterministic kernels).
    static ConstraintSet kernels(int x_bits, int z_bits, std::vector<SimulatorKernel> base = {}) {
        detail::check_bits(x_bits + z_bits);
        ConstraintSet c(Tag::kernels, x_bits + z_bits);
        c.x_bits_ = x_bits;
        c.z_bits_ = z_bits;
        c.base_ = std::move(base);
        for (const auto& k : c.base_)
            if (k.x_bits != x_bits || k.z_bits != z_bits)
                throw domain_mismatch("kernels: base kernel shape differs");
        return c;
    }

    Tag tag() const { return tag_; }
    int bit_width() const { return bit_width_; }
    int x_bits() const { return x_bits_; }
    int z_bits() const { return z_bits_; }
    double eps() const { return eps_; }
    double delta() const { return eps_; }
    double k() const { return k_; }
    const FiniteDistribution& reference() const { return *reference_; }
    const std::vector<SimulatorKernel>& base() const { return base_; }

    /// Pointwise caps of the distribution-shaped sets.
    std::vector<double> caps() const {
        std::size_t n = std::size_t{1} << bit_width_;
        switch (tag_) {
            case Tag::density:
            case Tag::dense: {
                std::vector<double> c(n);
                for (std::size_t i = 0; i < n; ++i) c[i] = (*reference_)[i] / eps_;
                return c;
            }
            case Tag::minentropy:
                return std::vector<double>(n, std::exp2(-k_));
            case Tag::conditioned_minentropy:
                return std::vector<double>(n, std::exp2(-k_) / (1.0 - eps_));
            case Tag::kernels:
                throw invalid_parameter("caps: kernels tag has no distribution caps");
        }
        throw invalid_parameter("caps: bad tag");
    }

    bool contains(const FiniteDistribution& x, double slack = kGapSlack) const {
        if (x.bit_width() != bit_width_) return false;
        auto c = caps();
        for (std::size_t i = 0; i < c.size(); ++i)
            if (x[i] > c[i] + slack) return false;
        return true;
    }

private:
    ConstraintSet(Tag t, int bits) : tag_(t), bit_width_(bits) {}

    Tag tag_;
    int bit_width_;
    int x_bits_ = 0, z_bits_ = 0;
    double eps_ = 0.0;  // density eps / dense delta / conditioning eps
    double k_ = 0.0;    // min-entropy bits
    std::optional<FiniteDistribution> reference_;
    std::vector<SimulatorKernel> base_;
};

namespace detail {

/// Exact optimizer of sum_i score(i)*x(i) over a capped simplex: fill caps in
/// score order (ties toward the lowest index), one fractional atom at the end.
inline FiniteDistribution greedy_cap_fill(const std::vector<double>& score,
                                          const std::vector<double>& caps, int bit_width,
                                          Orientation orient) {
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    if (orient == Orientation::minimize)
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (score[a] != score[b]) return score[a] < score[b];
            return a < b;
        });
    else
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        });
    std::vector<double> mass(score.size(), 0.0);
    double remaining = 1.0;
    for (std::size_t idx : order) {
        if (remaining <= 0.0) break;
        double take = std::min(caps[idx], remaining);
        mass[idx] = take;
        remaining -= take;
    }
    if (remaining > kNormTol) throw infeasible_constraint("greedy_cap_fill: caps sum below 1");
    return FiniteDistribution(bit_width, std::move(mass));
}

/// Per-point contribution of x's mass to the payoff (the affine part).
inline std::vector<double> payoff_scores(const TestFunction& a, const PayoffMode& mode) {
    std::vector<double> s(a.size());
    switch (mode.kind()) {
        case PayoffMode::Kind::unpredictability: {
            const auto& f = mode.target();
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.5 * a[i] * f[i];
            break;
        }
        case PayoffMode::Kind::distinguishing:
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = -a[i];
            break;
        case PayoffMode::Kind::simulation:
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i];
            break;
    }
    return s;
}

}  // namespace detail

/// Exact best response of the constrained player to a (mixed) strategy:
/// the distribution in the set minimizing (or maximizing) the payoff.
inline FiniteDistribution best_response_constrained(const TestFunction& a, const ConstraintSet& c,
                                                    const PayoffMode& mode,
                                                    Orientation orient = Orientation::minimize) {
    if (c.tag() == ConstraintSet::Tag::kernels)
        throw invalid_parameter("best_response_constrained: kernel games use the kernel oracle");
    if (a.bit_width() != c.bit_width() || mode.play_bits() != c.bit_width())
        throw domain_mismatch("best_response_constrained: domains differ");
    return detail::greedy_cap_fill(detail::payoff_scores(a, mode), c.caps(), c.bit_width(), orient);
}

inline FiniteDistribution best_response_constrained(const MixedStrategy& a, const ConstraintSet& c,
                                                    const PayoffMode& mode,
                                                    Orientation orient = Orientation::minimize) {
    return best_response_constrained(a.collapse(), c, mode, orient);
}

/// Optimum of E_x[f] over the set (no payoff mode involved).
inline FiniteDistribution extremal_expectation(const TestFunction& f, const ConstraintSet& c,
                                               Orientation orient) {
    if (c.tag() == ConstraintSet::Tag::kernels)
        throw invalid_parameter("extremal_expectation: kernels tag unsupported");
    if (f.bit_width() != c.bit_width()) throw domain_mismatch("extremal_expectation: domains differ");
    return detail::greedy_cap_fill(f.values(), c.caps(), c.bit_width(), orient);
}

}  // namespace mml
