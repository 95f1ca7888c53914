#pragma once

// Convex-hull approximation toolkit: Holder conjugate bookkeeping, the
// empirical-average constant C_p, L_p sparsification of convex combinations
// by sampling, density-ratio moment bounds for the capped constraint sets,
// and the exponent choices used by the certificate pipelines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"

namespace mml {

struct HolderPair {
    double p = 2.0;
    double q = 2.0;

    HolderPair(double p_, double q_) : p(p_), q(q_) {
        if (!(p >= 1.0)) throw invalid_exponent("HolderPair: p must be >= 1");
        double inv = (std::isinf(p) ? 0.0 : 1.0 / p) + (std::isinf(q) ? 0.0 : 1.0 / q);
        if (std::abs(inv - 1.0) > 1e-9) throw invalid_exponent("HolderPair: 1/p + 1/q != 1");
    }
};

/// Conjugate exponent: q = p/(p-1); p = 1 pairs with q = infinity.
inline HolderPair holder_conjugate(double p) {
    if (!(p >= 1.0)) throw invalid_exponent("holder_conjugate: p must be >= 1");
    if (std::isinf(p)) return HolderPair(p, 1.0);
    if (p == 1.0) return HolderPair(1.0, std::numeric_limits<double>::infinity());
    return HolderPair(p, p / (p - 1.0));
}

/// Constant governing L_p error of an ell-term empirical average:
/// 1 on [1,2], sqrt(2)*(Gamma((p+1)/2)/sqrt(pi))^(1/p) beyond; continuous at 2.
inline double maurey_constant(double p) {
    if (!(p >= 1.0)) throw invalid_exponent("maurey_constant: p must be >= 1");
    if (p <= 2.0) return 1.0;
    // lgamma is Lanczos-quality (~1e-14 relative), comfortably inside budget
    double log_c = 0.5 * std::log(2.0) + (std::lgamma((p + 1.0) / 2.0) - 0.5 * std::log(M_PI)) / p;
    return std::exp(log_c);
}

struct SparsifyReport {
    MixedStrategy result;
    double achieved_error = 0.0;  // ||mix - result||_p under nu
    double bound = 0.0;           // K * C_p / ell^(1 - 1/min(2,p))
    std::size_t attempts_used = 0;
    bool bound_met = true;
    std::size_t target_support = 0;
};

/// Sparsifies a convex combination to at most ell components by sampling
/// components i.i.d. from the weights, keeping the best of `attempts` draws
/// by L_p distance.  K defaults to the max component distance from the
/// mixture.  If the best draw still exceeds the bound it is returned anyway
/// with bound_met = false.
inline SparsifyReport sparsify_lp(const MixedStrategy& mix, std::size_t ell, double p,
                                  const FiniteDistribution& nu,
                                  std::optional<double> k_radius = std::nullopt,
                                  std::uint64_t seed = 0, std::size_t attempts = 16) {
    if (ell == 0) throw invalid_parameter("sparsify_lp: ell must be positive");
    if (!(p >= 1.0)) throw invalid_exponent("sparsify_lp: p must be >= 1");
    if (nu.bit_width() != mix.bit_width()) throw domain_mismatch("sparsify_lp: nu domain differs");
    const TestFunction target = mix.collapse();

    double radius = 0.0;
    if (k_radius) {
        radius = *k_radius;
    } else {
        for (std::size_t i = 0; i < mix.components.size(); ++i)
            if (mix.weights[i] > 0.0)
                radius = std::max(radius, lp_distance(target, mix.components[i], p, nu));
    }
    const double t = std::min(2.0, p);
    const double bound = radius * maurey_constant(p) / std::pow(static_cast<double>(ell), 1.0 - 1.0 / t);

    if (mix.support() <= ell) {
        SparsifyReport rep{mix, 0.0, bound, 0, true, ell};
        return rep;
    }

    Rng rng(seed);
    std::optional<MixedStrategy> best;
    double best_err = std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(attempts, 1); ++attempt) {
        ++used;
        std::vector<std::size_t> counts(mix.components.size(), 0);
        for (std::size_t j = 0; j < ell; ++j) ++counts[sample_weighted(rng, mix.weights)];
        std::vector<double> w;
        std::vector<TestFunction> comp;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            w.push_back(static_cast<double>(counts[i]) / static_cast<double>(ell));
            comp.push_back(mix.components[i]);
        }
        MixedStrategy candidate(std::move(w), std::move(comp));
        double err = lp_distance(target, candidate.collapse(), p, nu);
        if (err < best_err) {
            best_err = err;
            best = std::move(candidate);
        }
        if (best_err <= bound) break;
    }
    SparsifyReport rep{*best, best_err, bound, used, best_err <= bound + kGapSlack, ell};
    return rep;
}

/// q-th moment of the density ratio dx/dreference under the reference; the
/// quantity multiplying ||a - a'||_p in the payoff-gap bound.  Infinite if x
/// puts mass where the reference has none.
inline double density_ratio_moment(const FiniteDistribution& x, const FiniteDistribution& reference,
                                   double q) {
    if (x.bit_width() != reference.bit_width())
        throw domain_mismatch("density_ratio_moment: domains differ");
    if (std::isinf(q)) {
        double mx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (reference[i] > 0.0)
                mx = std::max(mx, x[i] / reference[i]);
            else if (x[i] > kMassSlack)
                return std::numeric_limits<double>::infinity();
        }
        return mx;
    }
    if (!(q >= 1.0)) throw invalid_exponent("density_ratio_moment: q must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (reference[i] > 0.0)
            s += reference[i] * std::pow(x[i] / reference[i], q);
        else if (x[i] > kMassSlack)
            return std::numeric_limits<double>::infinity();
    }
    return std::pow(s, 1.0 / q);
}

/// Bound on how much swapping a for a' can move the played distribution's
/// payoff term: moment_q(dx/dreference) * ||a - a'||_p.  `halve` applies the
/// factor 1/2 that the prediction payoff carries ((1+corr)/2 differences).
inline double holder_gap_bound(const TestFunction& a, const TestFunction& a_prime,
                               const FiniteDistribution& x, const FiniteDistribution& reference,
                               const HolderPair& pair, bool halve = false) {
    double m = density_ratio_moment(x, reference, pair.q);
    double d = lp_distance(a, a_prime, pair.p, reference);
    return (halve ? 0.5 : 1.0) * m * d;
}

/// Worst-case density-ratio moment over a capped constraint set, attained by
/// flat extreme points: eps^(-1/p) for density/dense (ratio vs the set's own
/// reference), 2^(Delta/p) for min-entropy sets (ratio vs uniform), and
/// (2^Delta/(1-eps))^(1/p) for the conditioned variant.
inline double moment_bound(const ConstraintSet& c, const HolderPair& pair) {
    switch (c.tag()) {
        case ConstraintSet::Tag::density:
        case ConstraintSet::Tag::dense:
            return std::pow(c.eps(), -1.0 / pair.p);
        case ConstraintSet::Tag::minentropy: {
            double delta_bits = static_cast<double>(c.bit_width()) - c.k();
            return std::exp2(delta_bits / pair.p);
        }
        case ConstraintSet::Tag::conditioned_minentropy: {
            double delta_bits = static_cast<double>(c.bit_width()) - c.k();
            return std::pow(std::exp2(delta_bits) / (1.0 - c.eps()), 1.0 / pair.p);
        }
        case ConstraintSet::Tag::kernels:
            throw invalid_parameter("moment_bound: kernels tag has no distribution moment");
    }
    throw invalid_parameter("moment_bound: bad tag");
}

/// Exponent schedule for a certificate pipeline: the Holder exponent p and
/// the sparsification size ell(delta) = ceil(p * delta^-2 / 2).
struct ExponentChoice {
    double p;
    HolderPair pair;

    std::size_t ell(double delta) const {
        if (!(delta > 0.0) || delta >= 1.0) throw invalid_parameter("ell: delta must lie in (0,1)");
        double v = std::ceil(0.5 * p / (delta * delta));
        return static_cast<std::size_t>(v);
    }
};

/// Prediction pipeline: p = max(2, 2*log2(1/eps)); the floor binds at eps = 1/2.
inline ExponentChoice choose_holder_exponent_hardcore(double eps) {
    if (!(eps > 0.0) || eps > 0.5) throw invalid_parameter("choose_holder_exponent_hardcore: eps in (0,1/2]");
    double p = std::max(2.0, 2.0 * std::log2(1.0 / eps));
    return ExponentChoice{p, holder_conjugate(p)};
}

/// Entropy-gap pipeline: p = Delta + 1.
inline ExponentChoice choose_holder_exponent_metric(double delta_bits) {
    if (delta_bits < 0.0) throw invalid_parameter("choose_holder_exponent_metric: Delta must be >= 0");
    double p = std::max(1.0, delta_bits + 1.0);
    return ExponentChoice{p, holder_conjugate(p)};
}

/// max over the class of E_{x<-X} Var_{z<-uniform}[A(x,z)]; the knob that
/// shrinks simulator support when distinguishers barely read z.
inline double estimate_class_variance(const std::vector<TestFunction>& cls,
                                      const FiniteDistribution& x_marginal) {
    if (cls.empty()) throw empty_class("estimate_class_variance: empty class");
    double worst = 0.0;
    for (const auto& a : cls) {
        if (a.bit_width() < x_marginal.bit_width())
            throw domain_mismatch("estimate_class_variance: class domain smaller than x domain");
        const int z_bits = a.bit_width() - x_marginal.bit_width();
        const std::size_t nz = std::size_t{1} << z_bits;
        double acc = 0.0;
        for (std::size_t x = 0; x < x_marginal.size(); ++x) {
            if (x_marginal[x] == 0.0) continue;
            double mean = 0.0, mean_sq = 0.0;
            for (std::size_t z = 0; z < nz; ++z) {
                double v = a[(x << z_bits) | z];
                mean += v;
                mean_sq += v * v;
            }
            mean /= static_cast<double>(nz);
            mean_sq /= static_cast<double>(nz);
            acc += x_marginal[x] * (mean_sq - mean * mean);
        }
        worst = std::max(worst, acc);
    }
    return worst;
}

}  // namespace mml
