#pragma once

// Explicit high-min-entropy simulator.  A [0,1] distinguisher is rounded
// down onto the grid alpha_i = 1-(i-1)*eps (terminated by an exact 0 level
// so every point lands somewhere), the cumulative level masses d(i) are
// computed exactly or estimated from shared samples, and the output source Y
// is assembled from at most two flat pieces around the threshold index M'.
// Y trades at most 3*eps of E D against the entropy-capped optimum while
// keeping min-entropy >= n - Delta - 6.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/constraints.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"

namespace mml {

struct LevelDecomposition {
    double eps = 0.0;
    std::vector<double> levels;                   // alpha_1 = 1 down to an exact 0
    std::vector<std::size_t> level_of;            // per-point level (0-based)
    std::vector<std::vector<std::size_t>> sets;   // disjoint index sets covering the domain
    std::vector<double> exact_d;                  // d(i) = Pr_u[D >= alpha_i]
    std::vector<double> empirical_d;              // shared-sample estimate; = exact_d when exact
    std::size_t sample_count = 0;                 // 0 in exact mode

    /// Value table of the rounded-down distinguisher.
    std::vector<double> rounded_values() const {
        std::vector<double> v(level_of.size());
        for (std::size_t x = 0; x < v.size(); ++x) v[x] = levels[level_of[x]];
        return v;
    }
};

/// Rounds d down onto the alpha grid and computes exact + empirical level
/// cumulatives under u.  All samples are shared across levels, so the
/// empirical cumulative is monotone by construction.
inline LevelDecomposition level_decomposition(const TestFunction& d, double eps,
                                              const FiniteDistribution& u,
                                              std::optional<std::size_t> sample_budget,
                                              std::uint64_t seed) {
    if (!(eps > 0.0) || eps >= 1.0) throw invalid_parameter("level_decomposition: eps in (0,1)");
    if (d.bit_width() != u.bit_width()) throw domain_mismatch("level_decomposition: domains differ");
    for (double v : d.values())
        if (v < -kMassSlack || v > 1.0 + kMassSlack)
            throw invalid_parameter("level_decomposition: distinguisher values outside [0,1]");
    if (sample_budget && *sample_budget == 0)
        throw invalid_parameter("level_decomposition: sample budget must be positive");

    LevelDecomposition out;
    out.eps = eps;
    const std::size_t count = 1 + static_cast<std::size_t>(std::ceil(1.0 / eps - 1e-9));
    out.levels.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        out.levels[i] = std::max(0.0, 1.0 - static_cast<double>(i) * eps);
    out.levels.back() = 0.0;  // terminal level catches everything

    out.level_of.resize(d.size());
    out.sets.assign(count, {});
    for (std::size_t x = 0; x < d.size(); ++x) {
        std::size_t lvl = count - 1;
        for (std::size_t i = 0; i < count; ++i)
            if (out.levels[i] <= d[x]) {
                lvl = i;
                break;
            }
        out.level_of[x] = lvl;
        out.sets[lvl].push_back(x);
    }

    out.exact_d.assign(count, 0.0);
    for (std::size_t x = 0; x < d.size(); ++x) out.exact_d[out.level_of[x]] += u[x];
    for (std::size_t i = 1; i < count; ++i) out.exact_d[i] += out.exact_d[i - 1];

    if (!sample_budget) {
        out.empirical_d = out.exact_d;
        return out;
    }
    const std::size_t ell = *sample_budget;
    out.sample_count = ell;
    Rng rng(derive_seed(seed, 0x4c4556454cULL));
    std::vector<std::size_t> hits(count, 0);
    for (std::size_t j = 0; j < ell; ++j) ++hits[out.level_of[sample_weighted(rng, u.mass())]];
    out.empirical_d.assign(count, 0.0);
    std::size_t acc = 0;
    for (std::size_t i = 0; i < count; ++i) {
        acc += hits[i];
        out.empirical_d[i] = static_cast<double>(acc) / static_cast<double>(ell);
    }
    return out;
}

enum class EntropyCase { a, b, c };

inline std::string entropy_case_label(EntropyCase c) {
    switch (c) {
        case EntropyCase::a: return "a";
        case EntropyCase::b: return "b";
        default: return "c";
    }
}

struct HighEntropyResult {
    FiniteDistribution sampler;         // Y
    EntropyCase case_taken = EntropyCase::a;
    std::size_t m_prime = 0;            // 1-based threshold level index
    double min_entropy_achieved = 0.0;
    double optimum_gap = 0.0;           // max(0, E D(Y+) - E D(Y))
    double e_y = 0.0;                   // E D(Y) on the original values
    double e_y_plus = 0.0;              // E D(Y+), capped-greedy optimum
    double d_tilde_prev = 0.0;          // empirical cumulative below M'
    LevelDecomposition levels;
};

/// Three-case flat construction around the threshold level M' (the first
/// level whose empirical cumulative clears (3/4)*2^(-Delta)).  Boundary
/// precedence: the low branch wins at its boundary, then the high branch,
/// else the mixture.
inline HighEntropyResult build_high_entropy_simulator(
    const TestFunction& d, double delta_bits, double eps, std::uint64_t seed = 0,
    std::optional<std::size_t> sample_count = std::nullopt) {
    const int n = d.bit_width();
    if (delta_bits < 0.0 || delta_bits > n)
        throw invalid_parameter("build_high_entropy_simulator: Delta outside [0, n]");
    if (!(eps > 0.0) || eps > 0.25)
        throw invalid_parameter("build_high_entropy_simulator: eps in (0, 1/4]");

    const FiniteDistribution u = FiniteDistribution::uniform(n);
    LevelDecomposition lv = level_decomposition(d, eps, u, sample_count, seed);

    const double cap = std::pow(2.0, -delta_bits);
    const double threshold = 0.75 * cap;
    std::size_t m_prime = 0;  // 1-based
    for (std::size_t i = 0; i < lv.empirical_d.size(); ++i)
        if (lv.empirical_d[i] > threshold) {
            m_prime = i + 1;
            break;
        }
    if (m_prime == 0)
        throw degenerate_distinguisher(
            "build_high_entropy_simulator: no level clears the threshold");

    const double d_prev = m_prime >= 2 ? lv.empirical_d[m_prime - 2] : 0.0;

    std::vector<std::size_t> unioned;
    for (std::size_t i = 0; i + 1 < m_prime; ++i)
        unioned.insert(unioned.end(), lv.sets[i].begin(), lv.sets[i].end());
    const auto& top = lv.sets[m_prime - 1];

    EntropyCase which;
    FiniteDistribution y = u;  // placeholder, reassigned below
    if (d_prev <= cap * eps) {
        which = EntropyCase::a;
        y = FiniteDistribution::flat_on(n, top);
    } else if (d_prev >= cap / 16.0) {
        which = EntropyCase::b;
        y = FiniteDistribution::flat_on(n, unioned);
    } else {
        which = EntropyCase::c;
        const double r = d_prev / cap;
        y = FiniteDistribution::mix(r, FiniteDistribution::flat_on(n, unioned),
                                    FiniteDistribution::flat_on(n, top));
    }

    const FiniteDistribution y_plus =
        extremal_expectation(d, ConstraintSet::minentropy(n, n - delta_bits),
                             Orientation::maximize);
    HighEntropyResult out{std::move(y), which, m_prime, 0.0, 0.0, 0.0, 0.0, d_prev,
                          std::move(lv)};
    out.min_entropy_achieved = min_entropy(out.sampler);
    out.e_y = d.expectation(out.sampler);
    out.e_y_plus = d.expectation(y_plus);
    out.optimum_gap = std::max(0.0, out.e_y_plus - out.e_y);
    return out;
}

struct ConditionalHighEntropyResult {
    std::vector<std::pair<std::size_t, HighEntropyResult>> per_z;  // support values only
    JointDistribution simulated;        // (Y, Z); z-marginal matches bit-exactly
    double min_entropy_conditional = 0.0;  // worst case over conditioning values
};

/// Per-conditioning-value construction: the distinguisher lives on X x Z,
/// each slice d(.,z) gets its own simulator, and the slices are reassembled
/// against the original z-marginal (nudged by ulps so marginal_z() matches
/// the input bit for bit).
inline ConditionalHighEntropyResult build_high_entropy_simulator_conditional(
    const TestFunction& d, double delta_bits, double eps, const JointDistribution& joint,
    std::uint64_t seed = 0, std::optional<std::size_t> sample_count = std::nullopt) {
    const int n = joint.x_bits(), m = joint.z_bits();
    if (d.bit_width() != n + m)
        throw domain_mismatch(
            "build_high_entropy_simulator_conditional: distinguisher not on X x Z");
    const FiniteDistribution pz = joint.marginal_z();
    const std::size_t nx = std::size_t{1} << n, nz = std::size_t{1} << m;

    ConditionalHighEntropyResult out{
        {}, JointDistribution::independent(FiniteDistribution::uniform(n), pz), 0.0};
    std::vector<double> mass(nx * nz, 0.0);
    double worst_entropy = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < nz; ++z) {
        if (pz[z] == 0.0) continue;
        std::vector<double> slice(nx);
        for (std::size_t x = 0; x < nx; ++x) slice[x] = d[(x << m) | z];
        TestFunction dz(n, d.range(), std::move(slice), d.complexity());
        HighEntropyResult r = build_high_entropy_simulator(dz, delta_bits, eps,
                                                           derive_seed(seed, z), sample_count);
        worst_entropy = std::min(worst_entropy, r.min_entropy_achieved);
        for (std::size_t x = 0; x < nx; ++x) mass[(x << m) | z] = pz[z] * r.sampler[x];
        // land the column's float sum exactly on pz[z] (same order marginal_z uses)
        for (int pass = 0; pass < 8; ++pass) {
            double s = 0.0;
            for (std::size_t x = 0; x < nx; ++x) s += mass[(x << m) | z];
            if (s == pz[z]) break;
            std::size_t arg = 0;
            for (std::size_t x = 1; x < nx; ++x)
                if (mass[(x << m) | z] > mass[(arg << m) | z]) arg = x;
            mass[(arg << m) | z] += pz[z] - s;
        }
        out.per_z.emplace_back(z, std::move(r));
    }
    out.simulated = JointDistribution(n, m, std::move(mass));
    out.min_entropy_conditional = worst_entropy;
    return out;
}

}  // namespace mml
