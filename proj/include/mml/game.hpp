#pragma once

// Zero-sum game solver: the function player runs multiplicative weights over
// a finite class, the constrained player answers with exact best responses
// (greedy cap fills, or the row-argmax/argmin kernel mixture for kernel
// games).  Returned strategies are time averages; the duality gap
//
//   gap = max_pure_payoff(vs c_strategy) - achieved_payoff(response vs a_strategy)
//
// certifies distance from equilibrium.  Everything is deterministic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/kernel.hpp"
#include "mml/payoff.hpp"

namespace mml {

struct TranscriptRow {
    std::size_t round;
    double value;
    double gap;
};

struct EquilibriumResult {
    double value = 0.0;                      // payoff at the averaged strategy pair
    std::optional<MixedStrategy> a_strategy; // averaged weights over the class
    std::optional<FiniteDistribution> c_strategy;  // averaged play (induced joint for kernels)
    std::optional<SimulatorKernel> c_kernel;       // kernel games only
    // round responses for kernel games (weight, kernel); consecutive duplicates merged
    std::vector<std::pair<double, SimulatorKernel>> kernel_components;
    double gap = 0.0;
    std::size_t rounds = 0;
    bool converged = false;
    std::vector<TranscriptRow> transcript;
};

struct SolveOptions {
    double tau = 1e-3;
    std::size_t max_rounds = 20000;
    // update uses 2*g_t - g_{t-1} instead of g_t; stabilizes cycling instances
    bool optimistic = true;
    std::size_t gap_stride = 1;  // evaluate the stopping gap every k rounds
};

namespace detail {

inline double payoff_on_mass(const TestFunction& a, const std::vector<double>& mass,
                             const PayoffMode& mode) {
    switch (mode.kind()) {
        case PayoffMode::Kind::unpredictability: {
            const auto& f = mode.target();
            double corr = 0.0;
            for (std::size_t i = 0; i < mass.size(); ++i) corr += mass[i] * a[i] * f[i];
            return 0.5 * (1.0 + corr);
        }
        case PayoffMode::Kind::distinguishing: {
            double s = 0.0;
            for (std::size_t i = 0; i < mass.size(); ++i) s += mass[i] * a[i];
            return a.expectation(mode.reference()) - s;
        }
        case PayoffMode::Kind::simulation: {
            double s = 0.0;
            for (std::size_t i = 0; i < mass.size(); ++i) s += mass[i] * a[i];
            return s - a.expectation(mode.joint().flattened());
        }
    }
    throw invalid_parameter("payoff_on_mass: bad mode");
}

/// Payoff range (half-width around its midpoint) used to rescale updates
/// into [0,1] before exponentiation.
inline std::pair<double, double> payoff_bounds(const PayoffMode& mode, ValueRange range) {
    if (mode.kind() == PayoffMode::Kind::unpredictability) return {0.0, 1.0};
    double w = range_hi(range) - range_lo(range);
    return {-w, w};
}

/// Row-wise argmax/argmin kernel response making the simulation payoff
/// against the queried strategy exactly zero: mix the best and worst
/// deterministic kernels with weight theta on the worst.
struct KernelResponse {
    SimulatorKernel kernel;
    double theta;
    double v_plus = 0.0;   // E a(X, h+(X))
    double v_minus = 0.0;  // E a(X, h-(X))
    double v_joint = 0.0;  // E a(X, Z)
};

inline KernelResponse kernel_zero_response(const std::vector<double>& abar_values,
                                           const JointDistribution& joint) {
    const std::size_t nx = joint.x_size(), nz = joint.z_size();
    const FiniteDistribution xm = joint.marginal_x();
    std::vector<std::size_t> hi(nx, 0), lo(nx, 0);
    double v_hi = 0.0, v_lo = 0.0, v_joint = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        std::size_t best = 0, worst = 0;
        for (std::size_t z = 1; z < nz; ++z) {
            double v = abar_values[(x * nz) + z];
            if (v > abar_values[x * nz + best]) best = z;
            if (v < abar_values[x * nz + worst]) worst = z;
        }
        hi[x] = best;
        lo[x] = worst;
        v_hi += xm[x] * abar_values[x * nz + best];
        v_lo += xm[x] * abar_values[x * nz + worst];
    }
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t z = 0; z < nz; ++z) v_joint += joint.at(x, z) * abar_values[x * nz + z];
    const double up = v_hi - v_joint, down = v_lo - v_joint;
    double theta = 0.0;
    if (up - down > kMassSlack) theta = std::clamp(up / (up - down), 0.0, 1.0);
    auto k_hi = SimulatorKernel::deterministic(joint.x_bits(), joint.z_bits(), hi);
    auto k_lo = SimulatorKernel::deterministic(joint.x_bits(), joint.z_bits(), lo);
    auto mixed = k_lo.mix(theta, k_hi);
    mixed.component_count = 1;  // one oracle response = one component
    return {std::move(mixed), theta, v_hi, v_lo, v_joint};
}

/// Best base kernel (restricted hull) by payoff; ties toward the lowest index.
inline SimulatorKernel kernel_base_response(const std::vector<double>& abar_values,
                                            const JointDistribution& joint,
                                            const std::vector<SimulatorKernel>& base) {
    if (base.empty()) throw empty_class("kernel_base_response: empty base");
    const std::size_t nz = joint.z_size();
    const FiniteDistribution xm = joint.marginal_x();
    double best_v = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        double v = 0.0;
        for (std::size_t x = 0; x < joint.x_size(); ++x)
            for (std::size_t z = 0; z < nz; ++z)
                v += xm[x] * base[i].rows[x][z] * abar_values[x * nz + z];
        if (i == 0 || v < best_v) {
            best_v = v;
            best_i = i;
        }
    }
    return base[best_i];
}

}  // namespace detail

/// Duality gap of a strategy pair: upper envelope over pure functions against
/// c_strategy minus the payoff achieved by the constrained oracle's response
/// to a_strategy.  Non-negative up to rounding for the games built here.
inline double duality_gap(const std::vector<TestFunction>& cls, const ConstraintSet& c,
                          const PayoffMode& mode, const EquilibriumResult& result) {
    if (cls.empty()) throw empty_class("duality_gap: empty class");
    if (!result.a_strategy || !result.c_strategy)
        throw invalid_parameter("duality_gap: result lacks strategies");
    double upper = -1e300;
    for (const auto& a : cls) upper = std::max(upper, payoff(a, *result.c_strategy, mode));
    const TestFunction abar = result.a_strategy->collapse();
    double lower;
    if (c.tag() == ConstraintSet::Tag::kernels) {
        auto resp = c.base().empty()
                        ? detail::kernel_zero_response(abar.values(), mode.joint()).kernel
                        : detail::kernel_base_response(abar.values(), mode.joint(), c.base());
        lower = detail::payoff_on_mass(abar, resp.joint_with(mode.joint().marginal_x()).flattened().mass(),
                                       mode);
    } else {
        lower = payoff(abar, best_response_constrained(abar, c, mode), mode);
    }
    return upper - lower;
}

/// Multiplicative-weights solve of the class-vs-constraint-set game.
/// Learning rate sqrt(ln|class|/max_rounds); payoffs rescaled to [0,1] for
/// the update; returns time-averaged strategies once the gap reaches tau,
/// or the averages at max_rounds flagged converged=false.
inline EquilibriumResult solve_zero_sum(const std::vector<TestFunction>& cls, const ConstraintSet& c,
                                        const PayoffMode& mode, double tau = 1e-3,
                                        std::size_t max_rounds = 20000,
                                        SolveOptions options = SolveOptions{}) {
    if (cls.empty()) throw empty_class("solve_zero_sum: empty class");
    options.tau = tau;
    options.max_rounds = std::max<std::size_t>(1, max_rounds);
    const std::size_t k = cls.size();
    const std::size_t n = cls.front().size();
    for (const auto& a : cls)
        if (a.bit_width() != static_cast<int>(cls.front().bit_width()))
            throw domain_mismatch("solve_zero_sum: class domains differ");
    if (mode.play_bits() != cls.front().bit_width())
        throw domain_mismatch("solve_zero_sum: mode domain differs from class");
    const bool kernel_game = c.tag() == ConstraintSet::Tag::kernels;
    if (kernel_game && mode.kind() != PayoffMode::Kind::simulation)
        throw invalid_parameter("solve_zero_sum: kernels tag needs a simulation payoff");
    if (c.bit_width() != cls.front().bit_width())
        throw domain_mismatch("solve_zero_sum: constraint domain differs from class");
    const auto [pay_lo, pay_hi] = detail::payoff_bounds(mode, cls.front().range());
    const double pay_span = pay_hi - pay_lo;
    const double eta = std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(k, 2))) /
                                 static_cast<double>(options.max_rounds));

    std::vector<double> log_w(k, 0.0), w(k), prev_g(k, 0.0), g(k);
    std::vector<double> abar(n), sum_abar(n, 0.0), sum_mass(n, 0.0), avg_mass(n);
    std::vector<double> sum_w(k, 0.0);
    std::vector<double> sum_g(k, 0.0);  // running sum of payoff(A_i, c_t): affine => avg = payoff vs avg play
    EquilibriumResult result;
    const JointDistribution* joint = kernel_game ? &mode.joint() : nullptr;
    FiniteDistribution xm = kernel_game ? mode.joint().marginal_x() : FiniteDistribution::uniform(0);
    std::vector<std::vector<double>> sum_kernel_rows;
    if (kernel_game)
        sum_kernel_rows.assign(std::size_t{1} << c.x_bits(),
                               std::vector<double>(std::size_t{1} << c.z_bits(), 0.0));

    std::size_t t = 0;
    while (t < options.max_rounds) {
        ++t;
        // current mixture
        double mx = *std::max_element(log_w.begin(), log_w.end());
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) z += (w[i] = std::exp(log_w[i] - mx));
        for (std::size_t i = 0; i < k; ++i) w[i] /= z;
        std::fill(abar.begin(), abar.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (w[i] == 0.0) continue;
            const auto& vals = cls[i].values();
            for (std::size_t x = 0; x < n; ++x) abar[x] += w[i] * vals[x];
        }
        const TestFunction abar_fn(cls.front().bit_width(), cls.front().range(), abar);

        // constrained response
        std::vector<double> play_mass;
        if (kernel_game) {
            SimulatorKernel resp = c.base().empty()
                                       ? detail::kernel_zero_response(abar, *joint).kernel
                                       : detail::kernel_base_response(abar, *joint, c.base());
            play_mass = resp.joint_with(xm).flattened().mass();
            for (std::size_t x = 0; x < resp.rows.size(); ++x)
                for (std::size_t zz = 0; zz < resp.rows[x].size(); ++zz)
                    sum_kernel_rows[x][zz] += resp.rows[x][zz];
            if (!result.kernel_components.empty() &&
                result.kernel_components.back().second.rows == resp.rows)
                result.kernel_components.back().first += 1.0;
            else
                result.kernel_components.emplace_back(1.0, std::move(resp));
        } else {
            play_mass = best_response_constrained(abar_fn, c, mode).mass();
        }

        // payoffs and update
        for (std::size_t i = 0; i < k; ++i) {
            g[i] = detail::payoff_on_mass(cls[i], play_mass, mode);
            sum_g[i] += g[i];
            double scaled = (g[i] - pay_lo) / pay_span;
            double grad = options.optimistic && t > 1 ? 2.0 * scaled - prev_g[i] : scaled;
            log_w[i] += eta * grad;
            prev_g[i] = scaled;
        }
        for (std::size_t i = 0; i < k; ++i) sum_w[i] += w[i];
        for (std::size_t x = 0; x < n; ++x) {
            sum_abar[x] += abar[x];
            sum_mass[x] += play_mass[x];
        }

        // stopping gap on the time averages
        if (t % options.gap_stride == 0 || t == options.max_rounds) {
            const double inv_t = 1.0 / static_cast<double>(t);
            double upper = -1e300;
            for (std::size_t i = 0; i < k; ++i) upper = std::max(upper, sum_g[i] * inv_t);
            for (std::size_t x = 0; x < n; ++x) avg_mass[x] = sum_mass[x] * inv_t;
            std::vector<double> abar_avg(n);
            for (std::size_t x = 0; x < n; ++x) abar_avg[x] = sum_abar[x] * inv_t;
            const TestFunction abar_avg_fn(cls.front().bit_width(), cls.front().range(), abar_avg);
            double lower;
            if (kernel_game) {
                auto resp = c.base().empty()
                                ? detail::kernel_zero_response(abar_avg, *joint).kernel
                                : detail::kernel_base_response(abar_avg, *joint, c.base());
                lower = detail::payoff_on_mass(abar_avg_fn,
                                               resp.joint_with(xm).flattened().mass(), mode);
            } else {
                lower = payoff(abar_avg_fn, best_response_constrained(abar_avg_fn, c, mode), mode);
            }
            double value = detail::payoff_on_mass(abar_avg_fn, avg_mass, mode);
            double gap = upper - lower;
            result.transcript.push_back({t, value, gap});
            result.value = value;
            result.gap = gap;
            if (gap <= options.tau) {
                result.converged = true;
                break;
            }
        }
    }
    result.rounds = t;

    const double inv_t = 1.0 / static_cast<double>(t);
    std::vector<double> final_w(k);
    double wsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) wsum += (final_w[i] = sum_w[i] * inv_t);
    for (std::size_t i = 0; i < k; ++i) final_w[i] /= wsum;
    result.a_strategy = MixedStrategy(final_w, cls);
    for (std::size_t x = 0; x < n; ++x) avg_mass[x] = sum_mass[x] * inv_t;
    double msum = 0.0;
    for (double v : avg_mass) msum += v;
    for (double& v : avg_mass) v /= msum;
    result.c_strategy = FiniteDistribution(cls.front().bit_width(), avg_mass);
    if (kernel_game) {
        for (auto& row : sum_kernel_rows) {
            double s = 0.0;
            for (double v : row) s += v;
            for (double& v : row) v /= s;
        }
        result.c_kernel = SimulatorKernel(c.x_bits(), c.z_bits(), std::move(sum_kernel_rows),
                                          result.kernel_components.size());
        double total = 0.0;
        for (auto& [cw, kk] : result.kernel_components) total += cw;
        for (auto& [cw, kk] : result.kernel_components) cw /= total;
    }
    return result;
}

/// Two-sided constrained game used by the entropy certificates: the
/// constrained player picks a PAIR (event-part P from `event_set`, model Q
/// from `model_set`) and the payoff of a function a is E_P[a] - E_Q[a].
/// The exact pair response is greedy-min for P and greedy-max for Q.
struct PairEquilibrium {
    double value = 0.0;
    std::optional<MixedStrategy> a_strategy;
    std::optional<FiniteDistribution> event_part;  // averaged P
    std::optional<FiniteDistribution> model_part;  // averaged Q
    double gap = 0.0;
    std::size_t rounds = 0;
    bool converged = false;
    std::vector<TranscriptRow> transcript;
};

inline PairEquilibrium solve_event_model_game(const std::vector<TestFunction>& cls,
                                              const ConstraintSet& event_set,
                                              const ConstraintSet& model_set, double tau,
                                              std::size_t max_rounds,
                                              SolveOptions options = SolveOptions{}) {
    if (cls.empty()) throw empty_class("solve_event_model_game: empty class");
    options.tau = tau;
    options.max_rounds = std::max<std::size_t>(1, max_rounds);
    const std::size_t k = cls.size();
    const std::size_t n = cls.front().size();
    if (event_set.bit_width() != cls.front().bit_width() ||
        model_set.bit_width() != cls.front().bit_width())
        throw domain_mismatch("solve_event_model_game: domains differ");
    const auto caps_p = event_set.caps();
    const auto caps_q = model_set.caps();
    const double span = 2.0 * (range_hi(cls.front().range()) - range_lo(cls.front().range()));
    const double eta = std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(k, 2))) /
                                 static_cast<double>(options.max_rounds));

    auto pair_payoff = [&](const TestFunction& a, const std::vector<double>& p,
                           const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t x = 0; x < n; ++x) s += (p[x] - q[x]) * a[x];
        return s;
    };

    std::vector<double> log_w(k, 0.0), w(k), prev_g(k, 0.0);
    std::vector<double> abar(n), sum_abar(n, 0.0), sum_p(n, 0.0), sum_q(n, 0.0);
    std::vector<double> sum_w(k, 0.0), sum_g(k, 0.0);
    PairEquilibrium result;

    std::size_t t = 0;
    while (t < options.max_rounds) {
        ++t;
        double mx = *std::max_element(log_w.begin(), log_w.end());
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) z += (w[i] = std::exp(log_w[i] - mx));
        for (std::size_t i = 0; i < k; ++i) w[i] /= z;
        std::fill(abar.begin(), abar.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (w[i] == 0.0) continue;
            const auto& vals = cls[i].values();
            for (std::size_t x = 0; x < n; ++x) abar[x] += w[i] * vals[x];
        }
        auto p = detail::greedy_cap_fill(abar, caps_p, cls.front().bit_width(), Orientation::minimize);
        auto q = detail::greedy_cap_fill(abar, caps_q, cls.front().bit_width(), Orientation::maximize);

        for (std::size_t i = 0; i < k; ++i) {
            double gi = pair_payoff(cls[i], p.mass(), q.mass());
            sum_g[i] += gi;
            double scaled = (gi + span / 2.0) / span;
            double grad = options.optimistic && t > 1 ? 2.0 * scaled - prev_g[i] : scaled;
            log_w[i] += eta * grad;
            prev_g[i] = scaled;
        }
        for (std::size_t i = 0; i < k; ++i) sum_w[i] += w[i];
        for (std::size_t x = 0; x < n; ++x) {
            sum_abar[x] += abar[x];
            sum_p[x] += p[x];
            sum_q[x] += q[x];
        }

        if (t % options.gap_stride == 0 || t == options.max_rounds) {
            const double inv_t = 1.0 / static_cast<double>(t);
            double upper = -1e300;
            for (std::size_t i = 0; i < k; ++i) upper = std::max(upper, sum_g[i] * inv_t);
            std::vector<double> abar_avg(n), p_avg(n), q_avg(n);
            for (std::size_t x = 0; x < n; ++x) {
                abar_avg[x] = sum_abar[x] * inv_t;
                p_avg[x] = sum_p[x] * inv_t;
                q_avg[x] = sum_q[x] * inv_t;
            }
            auto p_best = detail::greedy_cap_fill(abar_avg, caps_p, cls.front().bit_width(),
                                                  Orientation::minimize);
            auto q_best = detail::greedy_cap_fill(abar_avg, caps_q, cls.front().bit_width(),
                                                  Orientation::maximize);
            const TestFunction abar_avg_fn(cls.front().bit_width(), cls.front().range(), abar_avg);
            double lower = pair_payoff(abar_avg_fn, p_best.mass(), q_best.mass());
            double value = pair_payoff(abar_avg_fn, p_avg, q_avg);
            double gap = upper - lower;
            result.transcript.push_back({t, value, gap});
            result.value = value;
            result.gap = gap;
            if (gap <= options.tau) {
                result.converged = true;
                break;
            }
        }
    }
    result.rounds = t;
    const double inv_t = 1.0 / static_cast<double>(t);
    std::vector<double> final_w(k);
    double wsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) wsum += (final_w[i] = sum_w[i] * inv_t);
    for (std::size_t i = 0; i < k; ++i) final_w[i] /= wsum;
    result.a_strategy = MixedStrategy(final_w, cls);
    std::vector<double> p_avg(n), q_avg(n);
    double ps = 0.0, qs = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        ps += (p_avg[x] = sum_p[x] * inv_t);
        qs += (q_avg[x] = sum_q[x] * inv_t);
    }
    for (std::size_t x = 0; x < n; ++x) {
        p_avg[x] /= ps;
        q_avg[x] /= qs;
    }
    result.event_part = FiniteDistribution(cls.front().bit_width(), p_avg);
    result.model_part = FiniteDistribution(cls.front().bit_width(), q_avg);
    return result;
}

inline std::string transcript_to_csv(const std::vector<TranscriptRow>& rows) {
    std::string out = "round,value,gap\n";
    for (const auto& r : rows) {
        out += std::to_string(r.round);
        out += ',';
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.value, r.gap);
        out += buf;
    }
    return out;
}

}  // namespace mml
