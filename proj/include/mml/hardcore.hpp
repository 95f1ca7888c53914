#pragma once

// Hardcore-measure construction: given a target f that every class member
// predicts with probability at most 1 - eps/2 under V, the class-vs-density
// game produces a measure of mass exactly eps on which no class member (nor
// its complement) keeps advantage above delta + tau.  Certificates are
// checked by brute-force re-evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/convex.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/game.hpp"
#include "mml/payoff.hpp"

namespace mml {

struct HardcoreCertificate {
    BoundedMeasure event;          // mass exactly eps, capped by V
    double max_advantage = 0.0;    // max |corr with f| over class + complements, under V|E
    std::size_t strategy_support = 0;  // support of the sparsified distinguisher mixture
    double eps = 0.0, delta = 0.0, tau = 0.0;
    double holder_p = 0.0;
    MixedStrategy sparsified_strategy;
    SparsifyReport sparsify;
    EquilibriumResult game;
};

/// Exact minimizer of E[a*f] over density-eps slices of v: fills the measure
/// from the lowest a*f scores (ties toward the lowest index), one fractional
/// atom, total mass exactly eps.  When E_v[a*f] <= 1 - eps the slice it
/// returns has non-positive correlation.
inline BoundedMeasure weak_hardcore_oracle(const TestFunction& a, const TestFunction& f,
                                           const FiniteDistribution& v, double eps) {
    if (!(eps > 0.0) || eps > 1.0 + kMassSlack)
        throw invalid_parameter("weak_hardcore_oracle: eps must lie in (0,1]");
    if (a.bit_width() != f.bit_width() || a.bit_width() != v.bit_width())
        throw domain_mismatch("weak_hardcore_oracle: domains differ");
    const std::size_t n = v.size();
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) score[i] = a[i] * f[i];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (score[x] != score[y]) return score[x] < score[y];
        return x < y;
    });
    std::vector<double> mass(n, 0.0);
    double remaining = eps;
    for (std::size_t idx : order) {
        if (remaining <= 0.0) break;
        double take = std::min(v[idx], remaining);
        mass[idx] = take;
        remaining -= take;
    }
    if (remaining > kNormTol) throw infeasible_constraint("weak_hardcore_oracle: eps exceeds total mass");
    return BoundedMeasure(std::move(mass), v, eps);
}

inline BoundedMeasure weak_hardcore_oracle(const MixedStrategy& a, const TestFunction& f,
                                           const FiniteDistribution& v, double eps) {
    return weak_hardcore_oracle(a.collapse(), f, v, eps);
}

/// Builds and certifies a hardcore measure.  Throws premise_violated naming
/// the offending function if some class member predicts f with probability
/// above 1 - eps/2 under v, and no_convergence if the game misses tau.
inline HardcoreCertificate build_hardcore(const TestFunction& f, const std::vector<TestFunction>& cls,
                                          const FiniteDistribution& v, double eps, double delta,
                                          double tau, std::size_t max_rounds = 20000,
                                          std::uint64_t seed = 0) {
    if (cls.empty()) throw empty_class("build_hardcore: empty class");
    if (!(eps > 0.0) || eps >= 1.0) throw invalid_parameter("build_hardcore: eps in (0,1)");
    if (!(delta > 0.0) || delta >= 1.0) throw invalid_parameter("build_hardcore: delta in (0,1)");
    if (!(tau > 0.0)) throw invalid_parameter("build_hardcore: tau must be positive");
    const auto cls2 = with_complements(cls);
    const PayoffMode mode = PayoffMode::unpredictability(f);

    for (std::size_t i = 0; i < cls2.size(); ++i) {
        double agree = payoff(cls2[i], v, mode);  // Pr[A = f] under v
        if (agree > 1.0 - eps / 2.0 + kGapSlack)
            throw premise_violated("build_hardcore: class member " + std::to_string(i) +
                                   " predicts the target with probability " + std::to_string(agree));
    }

    // prediction payoffs live on a half-scale: gap tau/2 bounds the
    // correlation slack by tau
    auto game = solve_zero_sum(cls2, ConstraintSet::density(eps, v), mode, tau / 2.0, max_rounds);
    if (!game.converged)
        throw no_convergence("build_hardcore: duality gap " + std::to_string(game.gap) +
                             " after " + std::to_string(game.rounds) + " rounds");

    const FiniteDistribution& slice = *game.c_strategy;
    std::vector<double> mass(slice.size());
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = std::min(eps * slice[i], v[i]);
    BoundedMeasure event(std::move(mass), v, eps);

    double worst = 0.0;
    for (const auto& a : cls2) worst = std::max(worst, advantage(a, slice, mode));

    const auto choice = choose_holder_exponent_hardcore(std::min(eps, 0.5));
    auto sparse = sparsify_lp(*game.a_strategy, choice.ell(delta), choice.p, v, std::nullopt,
                              derive_seed(seed, 0x5041525345ULL));

    HardcoreCertificate cert{std::move(event),
                             worst,
                             sparse.result.support(),
                             eps,
                             delta,
                             tau,
                             choice.p,
                             sparse.result,
                             sparse,
                             std::move(game)};
    return cert;
}

struct VerificationEntry {
    std::size_t index = 0;
    double advantage = 0.0;
    bool pass = true;
};

struct VerificationReport {
    bool pass = true;
    bool density_ok = true;
    double measured_density = 0.0;
    double bound = 0.0;
    std::vector<VerificationEntry> entries;  // class members then their complements
};

/// Brute-force re-check of a certificate: density of the event and the
/// advantage of every class member and complement against delta + tau.
inline VerificationReport verify_hardcore(const HardcoreCertificate& cert, const TestFunction& f,
                                          const std::vector<TestFunction>& cls,
                                          const FiniteDistribution& v) {
    VerificationReport rep;
    rep.bound = cert.delta + cert.tau;
    rep.measured_density = cert.event.total();
    rep.density_ok = std::abs(rep.measured_density - cert.eps) <= 1e-6;
    for (std::size_t i = 0; i < cert.event.mass.size(); ++i)
        if (cert.event.mass[i] > v[i] + kMassSlack) rep.density_ok = false;
    const FiniteDistribution slice = normalize_measure(cert.event);
    const PayoffMode mode = PayoffMode::unpredictability(f);
    const auto cls2 = with_complements(cls);
    for (std::size_t i = 0; i < cls2.size(); ++i) {
        double adv = advantage(cls2[i], slice, mode);
        bool ok = adv <= rep.bound + kGapSlack;
        rep.entries.push_back({i, adv, ok});
        rep.pass = rep.pass && ok;
    }
    rep.pass = rep.pass && rep.density_ok;
    return rep;
}

}  // namespace mml
