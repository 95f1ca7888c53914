#pragma once

// Entropy certificates.
//
// metric_entropy_check: for every class member, the expectation under Y must
// be reachable (within eps) by some min-entropy-k distribution.
//
// build_hill_hardcore: upgrades that per-function guarantee to a single
// event E on Y (probability 1-eps) and a single model X' (min-entropy n-Delta)
// with |E_{Y|E}[A] - E_{X'}[A]| small for ALL class members at once.  The
// constrained player of the game picks the pair (Y|E slice, model); both
// parts have exact greedy responses.
//
// build_dense_model: if X is eps-indistinguishable from uniform and X' is a
// delta-dense slice of X, produces R' delta-dense in uniform that the class
// cannot tell from X'.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/convex.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/game.hpp"
#include "mml/hardcore.hpp"
#include "mml/payoff.hpp"

namespace mml {

struct MetricCheckEntry {
    std::size_t index = 0;
    double expectation = 0.0;  // E_Y[A]
    double reach_lo = 0.0;     // min over min-entropy-k sources
    double reach_hi = 0.0;     // max over min-entropy-k sources
    double gap = 0.0;          // distance from [reach_lo, reach_hi]
};

struct MetricCheckReport {
    bool holds = true;
    double worst_gap = 0.0;
    std::size_t witness = 0;  // first violator when !holds
    std::vector<MetricCheckEntry> entries;
};

/// Checks that every class member's expectation under y lies within eps of
/// the band reachable by min-entropy-k distributions (exact greedy extremes).
inline MetricCheckReport metric_entropy_check(const FiniteDistribution& y,
                                              const std::vector<TestFunction>& cls, double k,
                                              double eps) {
    if (cls.empty()) throw empty_class("metric_entropy_check: empty class");
    const auto set = ConstraintSet::minentropy(y.bit_width(), k);
    MetricCheckReport rep;
    bool found_witness = false;
    for (std::size_t i = 0; i < cls.size(); ++i) {
        const auto& a = cls[i];
        MetricCheckEntry e;
        e.index = i;
        e.expectation = a.expectation(y);
        e.reach_lo = a.expectation(extremal_expectation(a, set, Orientation::minimize));
        e.reach_hi = a.expectation(extremal_expectation(a, set, Orientation::maximize));
        e.gap = std::max({0.0, e.expectation - e.reach_hi, e.reach_lo - e.expectation});
        if (e.gap > eps + kGapSlack && !found_witness) {
            rep.witness = i;
            found_witness = true;
        }
        rep.worst_gap = std::max(rep.worst_gap, e.gap);
        rep.entries.push_back(e);
    }
    rep.holds = !found_witness;
    return rep;
}

struct HillCertificate {
    BoundedMeasure event;          // on y, mass exactly 1 - eps
    FiniteDistribution model;      // min-entropy >= n - delta_bits
    double max_advantage = 0.0;    // max |E_{Y|E}[A] - E_model[A]| over class + complements
    double delta_bits = 0.0;       // entropy deficiency Delta
    double eps = 0.0, delta = 0.0, tau = 0.0;
    std::size_t ell = 0;           // recorded sparsification size ceil(delta^-2 (Delta+1))
    std::size_t strategy_support = 0;
    double holder_p = 0.0;
    SparsifyReport sparsify;
    PairEquilibrium game;
};

/// Event-and-model certificate for a source with metric-type entropy n-Delta.
inline HillCertificate build_hill_hardcore(const FiniteDistribution& y,
                                           const std::vector<TestFunction>& cls, double delta_bits,
                                           double eps, double delta, double tau,
                                           std::size_t max_rounds = 20000, std::uint64_t seed = 0) {
    if (cls.empty()) throw empty_class("build_hill_hardcore: empty class");
    const int n = y.bit_width();
    if (delta_bits < 0.0 || delta_bits > n)
        throw invalid_parameter("build_hill_hardcore: Delta outside [0, n]");
    if (eps < 0.0 || eps >= 1.0) throw invalid_parameter("build_hill_hardcore: eps in [0,1)");
    if (!(delta > 0.0) || delta >= 1.0) throw invalid_parameter("build_hill_hardcore: delta in (0,1)");
    const double k = n - delta_bits;

    auto premise = metric_entropy_check(y, cls, k, eps);
    if (!premise.holds)
        throw premise_violated("build_hill_hardcore: class member " + std::to_string(premise.witness) +
                               " exceeds the entropy band by " + std::to_string(premise.worst_gap));

    const auto cls2 = with_complements(cls);
    const auto event_set = ConstraintSet::density(1.0 - eps, y);
    const auto model_set = ConstraintSet::minentropy(n, k);
    auto game = solve_event_model_game(cls2, event_set, model_set, tau, max_rounds);
    if (!game.converged)
        throw no_convergence("build_hill_hardcore: duality gap " + std::to_string(game.gap) +
                             " after " + std::to_string(game.rounds) + " rounds");

    const FiniteDistribution& p = *game.event_part;
    const FiniteDistribution& q = *game.model_part;
    std::vector<double> mass(p.size());
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = std::min((1.0 - eps) * p[i], y[i]);
    BoundedMeasure event(std::move(mass), y, 1.0 - eps);

    double worst = 0.0;
    for (const auto& a : cls2) worst = std::max(worst, std::abs(a.expectation(p) - a.expectation(q)));

    const auto choice = choose_holder_exponent_metric(delta_bits);
    const std::size_t ell =
        static_cast<std::size_t>(std::ceil((delta_bits + 1.0) / (delta * delta)));
    auto sparse = sparsify_lp(*game.a_strategy, ell, choice.p, FiniteDistribution::uniform(n),
                              std::nullopt, derive_seed(seed, 0x48494c4cULL));

    HillCertificate cert{std::move(event),
                         q,
                         worst,
                         delta_bits,
                         eps,
                         delta,
                         tau,
                         ell,
                         sparse.result.support(),
                         choice.p,
                         sparse,
                         std::move(game)};
    return cert;
}

/// Max class advantage between y and the composed source
/// (1-eps) * model + eps * (y conditioned off the event).
inline double hill_composition_advantage(const HillCertificate& cert, const FiniteDistribution& y,
                                         const std::vector<TestFunction>& cls) {
    std::vector<double> mix(y.size());
    for (std::size_t i = 0; i < mix.size(); ++i) {
        double off_event = std::max(0.0, y[i] - cert.event.mass[i]);  // eps * (Y | not E)
        mix[i] = (1.0 - cert.eps) * cert.model[i] + off_event;
    }
    double s = 0.0;
    for (double v : mix) s += v;
    for (double& v : mix) v /= s;
    const FiniteDistribution composed(y.bit_width(), std::move(mix));
    double worst = 0.0;
    for (const auto& a : with_complements(cls))
        worst = std::max(worst, std::abs(a.expectation(y) - a.expectation(composed)));
    return worst;
}

/// Pointwise density check: w(x) <= v(x)/delta everywhere (1e-9 slack).
inline bool is_dense(const FiniteDistribution& w, const FiniteDistribution& v, double delta) {
    if (w.bit_width() != v.bit_width()) throw domain_mismatch("is_dense: domains differ");
    if (!(delta > 0.0) || delta > 1.0 + kMassSlack) throw invalid_parameter("is_dense: delta in (0,1]");
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > v[i] / delta + kGapSlack) return false;
    return true;
}

struct DenseModelCertificate {
    FiniteDistribution model;   // R', delta-dense in uniform
    bool density_ok = true;
    double max_advantage = 0.0;  // max |E_{X'}[A] - E_model[A]| over class + complements
    double delta = 0.0, eps = 0.0, tau = 0.0;
    double eps_prime = 0.0;      // advertised bound c * eps / delta
    std::size_t ell = 0;
    std::size_t strategy_support = 0;
    double holder_p = 0.0;
    SparsifyReport sparsify;
    EquilibriumResult game;
};

/// Dense-model construction.  Premises (both checked): x_prime is delta-dense
/// in x; x is eps-indistinguishable from uniform for the class.
inline DenseModelCertificate build_dense_model(const FiniteDistribution& x,
                                               const FiniteDistribution& x_prime,
                                               const std::vector<TestFunction>& cls, double delta,
                                               double eps, double tau, double c_const = 2.0,
                                               std::size_t max_rounds = 20000,
                                               std::uint64_t seed = 0) {
    if (cls.empty()) throw empty_class("build_dense_model: empty class");
    if (!(delta > 0.0) || delta > 1.0) throw invalid_parameter("build_dense_model: delta in (0,1]");
    if (!(eps > 0.0) || eps >= 1.0) throw invalid_parameter("build_dense_model: eps in (0,1)");
    const int n = x.bit_width();
    if (!is_dense(x_prime, x, delta))
        throw density_violation("build_dense_model: x_prime is not delta-dense in x");

    const auto uniform = FiniteDistribution::uniform(n);
    const auto cls2 = with_complements(cls);
    for (std::size_t i = 0; i < cls2.size(); ++i) {
        double adv = std::abs(cls2[i].expectation(uniform) - cls2[i].expectation(x));
        if (adv > eps + kGapSlack)
            throw premise_violated("build_dense_model: class member " + std::to_string(i) +
                                   " separates x from uniform by " + std::to_string(adv));
    }

    auto game = solve_zero_sum(cls2, ConstraintSet::dense(delta, uniform),
                               PayoffMode::distinguishing(x_prime), tau, max_rounds);
    if (!game.converged)
        throw no_convergence("build_dense_model: duality gap " + std::to_string(game.gap) +
                             " after " + std::to_string(game.rounds) + " rounds");

    const FiniteDistribution& model = *game.c_strategy;
    double worst = 0.0;
    for (const auto& a : cls2)
        worst = std::max(worst, std::abs(a.expectation(x_prime) - a.expectation(model)));

    const double p = std::max(2.0, 2.0 * std::log2(1.0 / delta));
    const std::size_t ell = static_cast<std::size_t>(
        std::ceil(std::log2(1.0 / delta) * (delta / eps) * (delta / eps)));
    auto sparse = sparsify_lp(*game.a_strategy, std::max<std::size_t>(ell, 1), p, uniform,
                              std::nullopt, derive_seed(seed, 0x44454e5345ULL));

    DenseModelCertificate cert{model,
                               is_dense(model, uniform, delta),
                               worst,
                               delta,
                               eps,
                               tau,
                               c_const * eps / delta,
                               std::max<std::size_t>(ell, 1),
                               sparse.result.support(),
                               p,
                               sparse,
                               std::move(game)};
    return cert;
}

}  // namespace mml
