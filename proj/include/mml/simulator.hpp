#pragma once

// Auxiliary-input simulators: replace correlated leakage Z by a randomized
// kernel of X that the distinguisher class cannot tell from the real thing.
//
// weak_simulator_oracle answers a single distinguisher exactly (payoff 0) by
// interpolating the row-wise argmax and argmin kernels.  build_aux_simulator
// plays that oracle against the whole class, then thins the round mixture to
// ceil(2^lambda / eps^2) components and certifies every member (and its
// complement) below 2*eps + tau.  chernoff_sparsify is the companion
// class-side thinning: an empirical average of sampled tables within eps in
// sup norm.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/convex.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/game.hpp"
#include "mml/kernel.hpp"
#include "mml/payoff.hpp"

namespace mml {

using SimulatorResponse = detail::KernelResponse;

/// Exact zero-payoff kernel for one distinguisher: theta on the argmin
/// kernel, 1-theta on the argmax, theta = (v+ - v_joint)/(v+ - v-).
/// Sandwich v- <= v_joint <= v+ makes theta a probability; theta = 0 when
/// the distinguisher ignores z (v+ = v-).
inline SimulatorResponse weak_simulator_oracle(const TestFunction& a,
                                               const JointDistribution& joint) {
    if (a.bit_width() != joint.x_bits() + joint.z_bits())
        throw domain_mismatch("weak_simulator_oracle: distinguisher not on the X x Z domain");
    return detail::kernel_zero_response(a.values(), joint);
}

struct ChernoffReport {
    TestFunction result;
    double deviation = 0.0;  // sup-norm distance to the exact mixture
    double bound = 0.0;      // requested eps
    std::size_t ell = 0;
    std::size_t attempts_used = 0;
    bool bound_met = true;
};

/// Empirical average of ell = ceil(2 ln2 (bits+1)/eps^2) i.i.d. component
/// draws; best of `attempts` by sup-norm deviation, flagged (not thrown)
/// when none lands under eps.
inline ChernoffReport chernoff_sparsify(const MixedStrategy& mix, double eps, std::uint64_t seed,
                                        std::size_t attempts = 16) {
    if (!(eps > 0.0) || eps >= 1.0) throw invalid_parameter("chernoff_sparsify: eps in (0,1)");
    if (attempts == 0) throw invalid_parameter("chernoff_sparsify: attempts must be positive");
    for (const auto& c : mix.components)
        for (double v : c.values())
            if (v < -kMassSlack || v > 1.0 + kMassSlack)
                throw invalid_parameter("chernoff_sparsify: component values outside [0,1]");
    const TestFunction target = mix.collapse();
    const int bits = target.bit_width();
    const std::size_t ell = static_cast<std::size_t>(
        std::ceil(2.0 * M_LN2 * (bits + 1) / (eps * eps)));

    Rng rng(derive_seed(seed, 0x434845524eULL));
    std::vector<double> best;
    double best_dev = 0.0;
    std::size_t used = 0;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        std::vector<double> acc(target.size(), 0.0);
        for (std::size_t j = 0; j < ell; ++j) {
            const auto& c = mix.components[sample_weighted(rng, mix.weights)].values();
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c[i];
        }
        for (double& v : acc) v /= static_cast<double>(ell);
        double dev = 0.0;
        for (std::size_t i = 0; i < acc.size(); ++i)
            dev = std::max(dev, std::abs(acc[i] - target[i]));
        used = attempt + 1;
        if (best.empty() || dev < best_dev) {
            best = std::move(acc);
            best_dev = dev;
        }
        if (best_dev <= eps) break;
    }
    TestFunction result(bits, target.range(), std::move(best), static_cast<double>(ell));
    return {std::move(result), best_dev, eps, ell, used, best_dev <= eps};
}

struct AuxSimOptions {
    std::size_t max_rounds = 20000;
    std::uint64_t seed = 0;
    bool variance_mode = false;           // scale ell by max(sigma, eps)
    std::optional<double> sigma2;         // measured from the class when empty
    std::size_t attempts = 16;
    std::optional<std::size_t> ell_override;
};

struct AuxSimCertificate {
    SimulatorKernel sim;
    JointDistribution sim_joint;   // (X, Sim(X)); x-marginal matches bit-exactly
    double max_advantage = 0.0;    // over class + complements, after thinning
    double pre_advantage = 0.0;    // same measure for the full round mixture
    double bound = 0.0;            // 2*eps + tau
    bool bound_met = false;
    double eps = 0.0, tau = 0.0;
    std::size_t ell = 0;           // component budget actually used
    double sigma = -1.0;           // -1 when variance mode is off
    EquilibriumResult game;
};

namespace detail {

/// Max |E A(X,Sim) - E A(X,Z)| over the class for one candidate kernel.
inline double kernel_class_advantage(const SimulatorKernel& k, const JointDistribution& joint,
                                     const FiniteDistribution& xm,
                                     const std::vector<TestFunction>& cls) {
    const FiniteDistribution flat = k.joint_with(xm).flattened();
    const PayoffMode mode = PayoffMode::simulation(joint);
    double worst = 0.0;
    for (const auto& a : cls) worst = std::max(worst, std::abs(payoff(a, flat, mode)));
    return worst;
}

}  // namespace detail

/// Kernel-vs-class equilibrium followed by component thinning.  The emitted
/// certificate always carries the measured worst advantage; bound_met is the
/// verdict against 2*eps + tau.
inline AuxSimCertificate build_aux_simulator(const JointDistribution& joint,
                                             const std::vector<TestFunction>& cls, double eps,
                                             double tau, AuxSimOptions options = AuxSimOptions{}) {
    if (cls.empty()) throw empty_class("build_aux_simulator: empty class");
    if (!(eps > 0.0) || eps > 0.5) throw invalid_parameter("build_aux_simulator: eps in (0, 1/2]");
    if (!(tau > 0.0)) throw invalid_parameter("build_aux_simulator: tau must be positive");
    const int xb = joint.x_bits(), zb = joint.z_bits();
    for (const auto& a : cls)
        if (a.bit_width() != xb + zb)
            throw domain_mismatch("build_aux_simulator: class not on the X x Z domain");

    const auto cls2 = with_complements(cls);
    auto game = solve_zero_sum(cls2, ConstraintSet::kernels(xb, zb), PayoffMode::simulation(joint),
                               tau, options.max_rounds);
    if (!game.converged)
        throw no_convergence("build_aux_simulator: duality gap " + std::to_string(game.gap) +
                             " after " + std::to_string(game.rounds) + " rounds");

    const FiniteDistribution xm = joint.marginal_x();
    const double pre = detail::kernel_class_advantage(*game.c_kernel, joint, xm, cls2);

    double sigma = -1.0;
    std::size_t ell = static_cast<std::size_t>(
        std::ceil(std::ldexp(1.0, zb) / (eps * eps)));
    if (options.variance_mode) {
        sigma = std::sqrt(std::max(0.0, options.sigma2 ? *options.sigma2
                                                       : estimate_class_variance(cls2, xm)));
        ell = static_cast<std::size_t>(
            std::ceil(std::ldexp(1.0, zb) / (eps * eps) * std::max(sigma, eps)));
    }
    if (options.ell_override) ell = *options.ell_override;
    ell = std::max<std::size_t>(ell, 1);

    const auto& comps = game.kernel_components;
    SimulatorKernel sim = *game.c_kernel;
    if (comps.size() > ell) {
        std::vector<double> w(comps.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = comps[i].first;
        Rng rng(derive_seed(options.seed, 0x4155585349ULL));
        std::optional<SimulatorKernel> best;
        double best_adv = 0.0;
        const double bound = 2.0 * eps + tau;
        for (std::size_t attempt = 0; attempt < std::max<std::size_t>(options.attempts, 1);
             ++attempt) {
            std::vector<std::size_t> counts(comps.size(), 0);
            for (std::size_t j = 0; j < ell; ++j) ++counts[sample_weighted(rng, w)];
            std::vector<std::vector<double>> rows(std::size_t{1} << xb,
                                                  std::vector<double>(std::size_t{1} << zb, 0.0));
            std::size_t distinct = 0;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                if (counts[i] == 0) continue;
                ++distinct;
                const double wi = static_cast<double>(counts[i]) / static_cast<double>(ell);
                for (std::size_t x = 0; x < rows.size(); ++x)
                    for (std::size_t z = 0; z < rows[x].size(); ++z)
                        rows[x][z] += wi * comps[i].second.rows[x][z];
            }
            SimulatorKernel candidate(xb, zb, std::move(rows), distinct);
            double adv = detail::kernel_class_advantage(candidate, joint, xm, cls2);
            if (!best || adv < best_adv) {
                best = std::move(candidate);
                best_adv = adv;
            }
            if (best_adv <= bound) break;
        }
        sim = std::move(*best);
    }

    JointDistribution sim_joint = sim.joint_with(xm);
    const double worst = detail::kernel_class_advantage(sim, joint, xm, cls2);
    const double bound = 2.0 * eps + tau;
    AuxSimCertificate cert{std::move(sim), std::move(sim_joint), worst,          pre,
                           bound,          worst <= bound + kGapSlack, eps,     tau,
                           ell,            sigma,                      std::move(game)};
    return cert;
}

}  // namespace mml
