#pragma once

// Time-success-ratio calculus for leakage-resilient stream ciphers.
//
// A simulator cost model t_h = t*A*eps^(-alpha) + B*eps^(-beta) plus the
// square-root leakage loss eps' = q*sqrt(2^lambda * eps) determine the
// cipher's security level k': the largest value such that an attacker of any
// size s' succeeds with probability at most s'/2^k'.  At the worst-case
// profile eps' = 2^(-k'), s' = 1 this reduces to the bit inequality
//     2^(k - 2k' - lambda)  >  A*2^(alpha*k') + B*2^(beta*k')
// solved here by bisection in log2 space (0.01-bit resolution).

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"

namespace mml {

/// Cost of simulating leakage: t_h = t*A*eps^(-alpha) + B*eps^(-beta).
/// Stored in log2 so 2^(4*lambda)-style multipliers stay exact; B = 0 is
/// b_log2 = -infinity.
struct SimulatorCostModel {
    double a_log2 = 0.0;
    double alpha = 0.0;
    double b_log2 = -std::numeric_limits<double>::infinity();
    double beta = 0.0;

    SimulatorCostModel(double al2, double al, double bl2, double be)
        : a_log2(al2), alpha(al), b_log2(bl2), beta(be) {
        if (!std::isfinite(a_log2)) throw invalid_parameter("SimulatorCostModel: A must be finite");
        if (std::isnan(b_log2) || b_log2 == std::numeric_limits<double>::infinity())
            throw invalid_parameter("SimulatorCostModel: B must be finite or zero");
        if (alpha < 0.0 || beta < 0.0)
            throw invalid_parameter("SimulatorCostModel: exponents must be nonnegative");
    }

    /// Pure multiplicative cost (B = 0).
    static SimulatorCostModel multiplicative(double a_log2, double alpha) {
        return SimulatorCostModel(a_log2, alpha, -std::numeric_limits<double>::infinity(), 0.0);
    }

    double A() const { return std::exp2(a_log2); }
    double B() const { return std::isinf(b_log2) ? 0.0 : std::exp2(b_log2); }
    bool has_additive_term() const { return !std::isinf(b_log2); }
};

namespace detail {

inline double log2_add(double x, double y) {
    if (std::isinf(x) && x < 0) return y;
    if (std::isinf(y) && y < 0) return x;
    const double hi = std::max(x, y), lo = std::min(x, y);
    return hi + std::log2(1.0 + std::exp2(lo - hi));
}

/// log2 of the simulator cost at the worst-case profile eps' = 2^(-kp).
inline double cost_log2(const SimulatorCostModel& m, double kp) {
    return log2_add(m.a_log2 + m.alpha * kp, m.b_log2 + m.beta * kp);
}

}  // namespace detail

/// Square-root leakage loss and residual attacker size:
/// eps' = q*sqrt(2^lambda*eps), s' = s*A^(-1)*eps'^alpha - A^(-1)*B*eps'^(alpha-beta)
/// with s = 2^k*eps (brute-force-optimal primitive) and unit hidden constants.
inline std::pair<double, double> transform_cipher_params(double k, double lambda, double q,
                                                         double eps,
                                                         const SimulatorCostModel& model) {
    if (!(k > 0.0) || lambda < 0.0 || !(q > 0.0) || !(eps > 0.0))
        throw invalid_parameter("transform_cipher_params: parameters must be positive");
    const double eps_prime = q * std::sqrt(std::exp2(lambda) * eps);
    const double s = std::exp2(k) * eps;
    const double inv_a = std::exp2(-model.a_log2);
    const double s_prime = s * inv_a * std::pow(eps_prime, model.alpha) -
                           inv_a * model.B() * std::pow(eps_prime, model.alpha - model.beta);
    return {eps_prime, s_prime};
}

/// Largest k' (0.01-bit resolution) with
/// 2^(k - 2k' - lambda) > A*2^(alpha*k') + B*2^(beta*k').
inline double solve_security_bits(double k, double lambda, const SimulatorCostModel& model) {
    if (!(k > lambda)) throw invalid_parameter("solve_security_bits: requires k > lambda");
    auto margin = [&](double kp) {
        return (k - 2.0 * kp - lambda) - detail::cost_log2(model, kp);
    };
    if (margin(0.0) <= 0.0)
        throw no_positive_security("solve_security_bits: even k' = 0 fails the cost inequality");
    double lo = 0.0, hi = std::max(k, 1.0);
    for (int i = 0; i < 64 && margin(hi) > 0.0; ++i) hi *= 2.0;
    if (margin(hi) > 0.0)
        throw invalid_parameter("solve_security_bits: cost inequality never binds");
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? lo : hi) = mid;
    }
    return lo;  // margin(lo) > 0 and margin(lo + 0.02) <= 0
}

/// Exact solution when the additive term vanishes: k' = (k - lambda - log2 A)/(2 + alpha).
inline std::optional<double> closed_form_security_bits(double k, double lambda,
                                                       const SimulatorCostModel& model) {
    if (model.has_additive_term()) return std::nullopt;
    return (k - lambda - model.a_log2) / (2.0 + model.alpha);
}

/// Worst-case adversary profile at the solved security level.
struct CipherSecurity {
    double k_prime = 0.0;
    double eps_prime = 0.0;  // 2^(-k_prime)
    double s_prime = 0.0;    // residual size, > 1 by the defining inequality
    double k = 0.0, lambda = 0.0, q = 1.0;
    SimulatorCostModel model;
};

inline CipherSecurity analyze_cipher(double k, double lambda, const SimulatorCostModel& model,
                                     double q = 1.0) {
    const double kp = solve_security_bits(k, lambda, model);
    const double eps_prime = std::exp2(-kp);
    const double eps = (eps_prime / q) * (eps_prime / q) / std::exp2(lambda);
    const double s_prime = transform_cipher_params(k, lambda, q, eps, model).second;
    return CipherSecurity{kp, eps_prime, s_prime, k, lambda, q, model};
}

struct SecurityRow {
    std::string label;
    std::string cost_formula;
    double k_prime = 0.0;
};

struct SecurityTable {
    double k = 0.0, lambda = 0.0;
    std::vector<SecurityRow> rows;
};

inline std::string format_cost_formula(const SimulatorCostModel& m) {
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof buf, "s*2^%g*eps^-%g", m.a_log2, m.alpha);
    out = buf;
    if (m.has_additive_term()) {
        std::snprintf(buf, sizeof buf, " + 2^%g*eps^-%g", m.b_log2, m.beta);
        out += buf;
    }
    return out;
}

/// The three standard cost models at a given leakage width: sup-norm
/// equilibrium approximation, boosting, and L_p equilibrium approximation.
inline std::vector<std::pair<std::string, SimulatorCostModel>> default_cost_models(double lambda) {
    const double inf = std::numeric_limits<double>::infinity();
    return {
        {"minmax-linf", SimulatorCostModel(4.0 * lambda, 4.0, -inf, 0.0)},
        {"boosting", SimulatorCostModel(lambda, 2.0, lambda, 4.0)},
        {"minmax-lp", SimulatorCostModel(2.0 * lambda, 4.0, -inf, 0.0)},
    };
}

inline SecurityTable emit_comparison_table(
    double k, double lambda,
    const std::vector<std::pair<std::string, SimulatorCostModel>>& models) {
    if (models.empty()) throw empty_class("emit_comparison_table: no models");
    SecurityTable t{k, lambda, {}};
    for (const auto& [label, m] : models)
        t.rows.push_back({label, format_cost_formula(m), solve_security_bits(k, lambda, m)});
    return t;
}

inline std::string security_table_csv(const SecurityTable& t) {
    std::string out = "label,cost_formula,k_prime\n";
    char buf[64];
    for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof buf, "%.2f", r.k_prime);
        out += r.label + ",\"" + r.cost_formula + "\"," + buf + "\n";
    }
    return out;
}

inline std::string security_table_markdown(const SecurityTable& t) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "| k = %g, lambda = %g | cost model | k' |\n", t.k, t.lambda);
    std::string out = buf;
    out += "|---|---|---|\n";
    for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof buf, "| %s | %s | %.2f |\n", r.label.c_str(),
                      r.cost_formula.c_str(), r.k_prime);
        out += buf;
    }
    return out;
}

}  // namespace mml
