#pragma once

// Shared error taxonomy, numeric tolerances and deterministic RNG helpers
// used across the library.  Everything downstream assumes doubles and
// explicit mass tables; domains are {0,1}^n with n <= 24.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mml {

// --------------------------------------------------------------------------
// tolerances

// Normalization drift accepted when a mass table is handed to us directly.
inline constexpr double kNormTol = 1e-9;
// Drift accepted on deserialization; within this we silently renormalize.
inline constexpr double kDriftTol = 1e-6;
// Slack for non-negativity / cap comparisons done in floating point.
inline constexpr double kMassSlack = 1e-12;
// Slack used when asserting inequalities that hold with equality in exact
// arithmetic (duality gaps, dominance bounds).
inline constexpr double kGapSlack = 1e-9;

inline constexpr int kMaxBits = 24;

// --------------------------------------------------------------------------
// errors

struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct domain_mismatch : error { using error::error; };
struct zero_mass : error { using error::error; };
struct invalid_parameter : error { using error::error; };
struct invalid_exponent : error { using error::error; };
struct empty_class : error { using error::error; };
struct infeasible_constraint : error { using error::error; };
struct premise_violated : error { using error::error; };
struct density_violation : error { using error::error; };
struct no_convergence : error { using error::error; };
struct degenerate_distinguisher : error { using error::error; };
struct no_positive_security : error { using error::error; };
struct parse_error : error { using error::error; };

// --------------------------------------------------------------------------
// deterministic randomness
//
// mt19937_64 has a bit-stable output sequence by the standard.  We avoid
// std::*_distribution (implementation-defined mappings) so that runs are
// byte-identical across toolchains.

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent sub-seeds from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-seed for a named stream of one experiment seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    (void)splitmix64(s);
    return splitmix64(s);
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; exact and bit-stable.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    if (n == 0) throw invalid_parameter("uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

/// Samples an index from explicit weights (need not be normalized).
/// Ties and rounding resolve toward the lowest index.
inline std::size_t sample_weighted(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw invalid_parameter("sample_weighted: negative weight");
        total += w;
    }
    if (total <= 0.0) throw zero_mass("sample_weighted: all weights zero");
    double u = uniform_unit(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    // numerical leftover: land on the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

}  // namespace mml
