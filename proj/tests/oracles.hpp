#pragma once

// Brute-force reference implementations used only by the test suite.  Nothing
// here is shared with the library under test: the simplex, the greedy fills,
// and the payoff matrices are written from the definitions so that agreement
// is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mml/constraints.hpp"
#include "mml/functions.hpp"
#include "mml/payoff.hpp"

namespace orc {

struct LpResult {
    std::vector<double> x;
    double value = 0.0;
    bool feasible = true;
    bool bounded = true;
};

/// Dense two-phase simplex with Bland's rule: maximize obj.x subject to
/// A x <= b, x >= 0.  Instances here are tiny and well scaled, so a plain
/// tableau with a 1e-9 pivot tolerance is dependable.
inline LpResult lp_maximize(const std::vector<double>& obj, std::vector<std::vector<double>> A,
                            std::vector<double> b) {
    constexpr double tol = 1e-9;
    const std::size_t m = A.size(), n = obj.size();
    std::vector<int> needs_art(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        if (A[i].size() != n) throw std::invalid_argument("lp_maximize: ragged A");
        if (b[i] < 0.0) {
            for (auto& v : A[i]) v = -v;
            b[i] = -b[i];
            needs_art[i] = 1;
        }
    }
    const std::size_t n_art =
        static_cast<std::size_t>(std::count(needs_art.begin(), needs_art.end(), 1));
    const std::size_t N = n + m + n_art;  // originals, slack/surplus, artificials
    std::vector<std::vector<double>> T(m, std::vector<double>(N + 1, 0.0));
    std::vector<std::size_t> basis(m);
    std::size_t art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
        T[i][n + i] = needs_art[i] ? -1.0 : 1.0;
        if (needs_art[i]) {
            T[i][n + m + art] = 1.0;
            basis[i] = n + m + art;
            ++art;
        } else {
            basis[i] = n + i;
        }
        T[i][N] = b[i];
    }

    auto pivot = [&](std::size_t row, std::size_t col) {
        const double p = T[row][col];
        for (double& v : T[row]) v /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || std::abs(T[i][col]) < 1e-14) continue;
            const double f = T[i][col];
            for (std::size_t j = 0; j <= N; ++j) T[i][j] -= f * T[row][j];
        }
        basis[row] = col;
    };

    // Minimizes cost.x_all over the tableau; returns false when unbounded.
    auto run = [&](const std::vector<double>& cost, bool block_art) -> bool {
        std::vector<char> in_basis(N, 0);
        for (;;) {
            std::fill(in_basis.begin(), in_basis.end(), 0);
            for (std::size_t i = 0; i < m; ++i) in_basis[basis[i]] = 1;
            std::size_t enter = N;
            for (std::size_t j = 0; j < N && enter == N; ++j) {
                if (in_basis[j]) continue;
                if (block_art && j >= n + m) continue;
                double r = cost[j];
                for (std::size_t i = 0; i < m; ++i) r -= cost[basis[i]] * T[i][j];
                if (r < -tol) enter = j;  // Bland: lowest eligible index
            }
            if (enter == N) return true;
            std::size_t leave = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (T[i][enter] <= tol) continue;
                const double ratio = T[i][N] / T[i][enter];
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (leave == m || basis[i] < basis[leave]))) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
    };

    if (n_art > 0) {
        std::vector<double> cost1(N, 0.0);
        for (std::size_t j = n + m; j < N; ++j) cost1[j] = 1.0;
        run(cost1, false);
        double infeas = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] >= n + m) infeas += T[i][N];
        if (infeas > 1e-7) return {{}, 0.0, false, true};
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < n + m) continue;  // drive zero-level artificials out
            for (std::size_t j = 0; j < n + m; ++j) {
                if (std::abs(T[i][j]) > tol) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }
    std::vector<double> cost2(N, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost2[j] = -obj[j];
    if (!run(cost2, true)) return {{}, 0.0, true, false};

    LpResult out;
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) out.x[basis[i]] = T[i][N];
    out.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.value += obj[j] * out.x[j];
    return out;
}

/// min over x of max_i (M_i.x + d_i), where x splits into consecutive groups,
/// each a capped simplex (sum 1, 0 <= x_j <= cap_j).
inline double minimax_value(const std::vector<std::vector<double>>& M, const std::vector<double>& d,
                            const std::vector<std::vector<double>>& group_caps) {
    const std::size_t k = M.size();
    std::size_t n = 0;
    for (const auto& caps : group_caps) n += caps.size();
    const std::size_t nv = n + 2;  // x, t+, t-
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> row(nv, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = M[i][j];
        row[n] = -1.0;
        row[n + 1] = 1.0;
        A.push_back(std::move(row));
        b.push_back(-d[i]);
    }
    std::size_t off = 0;
    for (const auto& caps : group_caps) {
        std::vector<double> sum_row(nv, 0.0), neg_row(nv, 0.0);
        for (std::size_t j = 0; j < caps.size(); ++j) {
            sum_row[off + j] = 1.0;
            neg_row[off + j] = -1.0;
            if (caps[j] < 1.0 - 1e-15) {  // caps >= 1 are implied by the sum
                std::vector<double> cap_row(nv, 0.0);
                cap_row[off + j] = 1.0;
                A.push_back(std::move(cap_row));
                b.push_back(caps[j]);
            }
        }
        A.push_back(std::move(sum_row));
        b.push_back(1.0);
        A.push_back(std::move(neg_row));
        b.push_back(-1.0);
        off += caps.size();
    }
    std::vector<double> obj(nv, 0.0);
    obj[n] = -1.0;  // maximize -(t+ - t-) == minimize t
    obj[n + 1] = 1.0;
    const auto r = lp_maximize(obj, std::move(A), std::move(b));
    if (!r.feasible || !r.bounded) throw std::runtime_error("minimax_value: degenerate LP");
    return -r.value;
}

/// Payoff matrix row for one class member, written from the definitions.
inline void payoff_row(const mml::TestFunction& a, const mml::PayoffMode& mode,
                       std::vector<double>& row, double& offset) {
    const std::size_t n = a.size();
    row.assign(n, 0.0);
    offset = 0.0;
    switch (mode.kind()) {
        case mml::PayoffMode::Kind::unpredictability:
            for (std::size_t j = 0; j < n; ++j) row[j] = 0.5 * a[j] * mode.target()[j];
            offset = 0.5;
            break;
        case mml::PayoffMode::Kind::distinguishing: {
            for (std::size_t j = 0; j < n; ++j) row[j] = -a[j];
            const auto& ref = mode.reference();
            for (std::size_t j = 0; j < n; ++j) offset += ref[j] * a[j];
            break;
        }
        case mml::PayoffMode::Kind::simulation: {
            for (std::size_t j = 0; j < n; ++j) row[j] = a[j];
            const auto flat = mode.joint().flattened();
            for (std::size_t j = 0; j < n; ++j) offset -= flat[j] * a[j];
            break;
        }
    }
}

/// Exact value of the class-vs-constraint game solved by the library's MW.
inline double game_value(const std::vector<mml::TestFunction>& cls, const mml::ConstraintSet& c,
                         const mml::PayoffMode& mode) {
    std::vector<std::vector<double>> M(cls.size());
    std::vector<double> d(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) payoff_row(cls[i], mode, M[i], d[i]);
    return minimax_value(M, d, {c.caps()});
}

/// Exact value of the event/model pair game: min over (P,Q) in the product of
/// two capped simplices of max_i (E_P a_i - E_Q a_i).
inline double pair_game_value(const std::vector<mml::TestFunction>& cls,
                              const std::vector<double>& event_caps,
                              const std::vector<double>& model_caps) {
    const std::size_t n = event_caps.size();
    std::vector<std::vector<double>> M(cls.size(), std::vector<double>(2 * n, 0.0));
    std::vector<double> d(cls.size(), 0.0);
    for (std::size_t i = 0; i < cls.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            M[i][j] = cls[i][j];
            M[i][n + j] = -cls[i][j];
        }
    }
    return minimax_value(M, d, {event_caps, model_caps});
}

/// Independent greedy fill: minimize coeff.x over a capped simplex.
inline double greedy_min(const std::vector<double>& coeff, const std::vector<double>& caps) {
    std::vector<std::size_t> order(coeff.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return coeff[a] < coeff[b]; });
    double remaining = 1.0, total = 0.0;
    for (std::size_t idx : order) {
        const double take = std::min(caps[idx], remaining);
        total += take * coeff[idx];
        remaining -= take;
        if (remaining <= 0.0) break;
    }
    if (remaining > 1e-9) throw std::runtime_error("greedy_min: caps below 1");
    return total;
}

/// All vertices of {0 <= x <= cap, sum x = 1} for tiny n (subset at caps plus
/// at most one fractional coordinate).
inline std::vector<std::vector<double>> capped_vertices(const std::vector<double>& caps) {
    const std::size_t n = caps.size();
    if (n > 16) throw std::invalid_argument("capped_vertices: domain too large");
    std::vector<std::vector<double>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (mask & (std::size_t{1} << j)) s += caps[j];
        if (std::abs(s - 1.0) <= 1e-12) {
            std::vector<double> v(n, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (mask & (std::size_t{1} << j)) v[j] = caps[j];
            out.push_back(std::move(v));
            continue;
        }
        const double rem = 1.0 - s;
        if (rem <= 1e-12) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask & (std::size_t{1} << j)) continue;
            if (rem >= caps[j] - 1e-12) continue;
            std::vector<double> v(n, 0.0);
            for (std::size_t t = 0; t < n; ++t)
                if (mask & (std::size_t{1} << t)) v[t] = caps[t];
            v[j] = rem;
            out.push_back(std::move(v));
        }
    }
    return out;
}

/// Dual grid method for two-row minimax: max over mixing alpha of the exact
/// greedy inner minimum.  Grid of 1e5 steps; payoff slopes are O(1), so the
/// answer is within ~3e-5 of the true value.
inline double minimax_two_rows_grid(const std::vector<double>& r1, double d1,
                                    const std::vector<double>& r2, double d2,
                                    const std::vector<double>& caps) {
    const std::size_t steps = 100000;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> mix(r1.size());
    for (std::size_t s = 0; s <= steps; ++s) {
        const double al = static_cast<double>(s) / steps;
        for (std::size_t j = 0; j < mix.size(); ++j) mix[j] = al * r1[j] + (1.0 - al) * r2[j];
        best = std::max(best, greedy_min(mix, caps) + al * d1 + (1.0 - al) * d2);
    }
    return best;
}

}  // namespace orc
