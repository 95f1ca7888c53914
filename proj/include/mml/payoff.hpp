#pragma once

// Payoff modes for the two-player zero-sum games.  The function player's
// payoff against a distribution is affine in both arguments:
//
//   unpredictability(f):  v(a, x) = Pr[a = f under x] = (1 + E_x[a*f]) / 2
//   distinguishing(y):    v(a, x) = E_y[a] - E_x[a]
//   simulation(xz):       v(a, x) = E_x[a] - E_xz[a]   (x over the product domain)
//
// The mode's "advantage" recenters the payoff so that 0 means the strategy
// learned nothing: |2v-1| for unpredictability, |v| otherwise.

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"

namespace mml {

class PayoffMode {
public:
    enum class Kind { unpredictability, distinguishing, simulation };

    /// Predict a +-1 target under the played distribution.
    static PayoffMode unpredictability(TestFunction target) {
        if (target.range() != ValueRange::signed_unit)
            throw invalid_parameter("unpredictability: target must be +-1 valued");
        for (double v : target.values())
            if (std::abs(std::abs(v) - 1.0) > kMassSlack)
                throw invalid_parameter("unpredictability: target must be +-1 valued");
        PayoffMode m(Kind::unpredictability);
        m.target_ = std::move(target);
        return m;
    }

    /// Distinguish a fixed reference distribution from the played one.
    static PayoffMode distinguishing(FiniteDistribution reference) {
        PayoffMode m(Kind::distinguishing);
        m.reference_ = std::move(reference);
        return m;
    }

    /// Distinguish the played product-domain distribution from a fixed joint.
    static PayoffMode simulation(JointDistribution joint) {
        PayoffMode m(Kind::simulation);
        m.joint_ = std::move(joint);
        return m;
    }

    Kind kind() const { return kind_; }
    const TestFunction& target() const { return *target_; }
    const FiniteDistribution& reference() const { return *reference_; }
    const JointDistribution& joint() const { return *joint_; }

    /// Domain the played distribution must live on.
    int play_bits() const {
        switch (kind_) {
            case Kind::unpredictability: return target_->bit_width();
            case Kind::distinguishing: return reference_->bit_width();
            case Kind::simulation: return joint_->x_bits() + joint_->z_bits();
        }
        throw invalid_parameter("PayoffMode: bad kind");
    }

private:
    explicit PayoffMode(Kind k) : kind_(k) {}

    Kind kind_;
    std::optional<TestFunction> target_;
    std::optional<FiniteDistribution> reference_;
    std::optional<JointDistribution> joint_;
};

inline double payoff(const TestFunction& a, const FiniteDistribution& x, const PayoffMode& mode) {
    if (a.bit_width() != mode.play_bits() || x.bit_width() != mode.play_bits())
        throw domain_mismatch("payoff: domains differ");
    switch (mode.kind()) {
        case PayoffMode::Kind::unpredictability: {
            const auto& f = mode.target();
            double corr = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) corr += x[i] * a[i] * f[i];
            return 0.5 * (1.0 + corr);
        }
        case PayoffMode::Kind::distinguishing:
            return a.expectation(mode.reference()) - a.expectation(x);
        case PayoffMode::Kind::simulation:
            return a.expectation(x) - a.expectation(mode.joint().flattened());
    }
    throw invalid_parameter("payoff: bad mode");
}

inline double payoff(const MixedStrategy& a, const FiniteDistribution& x, const PayoffMode& mode) {
    return payoff(a.collapse(), x, mode);
}

/// Distance of the payoff from the "learned nothing" point.
inline double mode_advantage(double payoff_value, const PayoffMode& mode) {
    if (mode.kind() == PayoffMode::Kind::unpredictability) return std::abs(2.0 * payoff_value - 1.0);
    return std::abs(payoff_value);
}

inline double advantage(const TestFunction& a, const FiniteDistribution& x, const PayoffMode& mode) {
    return mode_advantage(payoff(a, x, mode), mode);
}

struct AdvantageReport {
    double max_advantage = 0.0;
    std::size_t argmax = 0;                 // lowest index on ties
    std::vector<double> advantages;         // one entry per class member
};

/// Max and argmax of the mode's advantage over a function class.
inline AdvantageReport class_advantage(const std::vector<TestFunction>& cls,
                                       const FiniteDistribution& x, const PayoffMode& mode) {
    if (cls.empty()) throw empty_class("class_advantage: empty class");
    AdvantageReport rep;
    rep.advantages.reserve(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) {
        double adv = advantage(cls[i], x, mode);
        rep.advantages.push_back(adv);
        if (adv > rep.max_advantage) {
            rep.max_advantage = adv;
            rep.argmax = i;
        }
    }
    return rep;
}

}  // namespace mml
