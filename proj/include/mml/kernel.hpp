#pragma once

// Randomized simulator kernels: one distribution over Z per input x.

#include <cstddef>
#include <utility>
#include <vector>

#include "mml/common.hpp"
#include "mml/domain.hpp"

namespace mml {

/// Stochastic map {0,1}^x_bits -> distributions over {0,1}^z_bits.
/// component_count tracks how many pure kernels this one averages.
struct SimulatorKernel {
    int x_bits = 0;
    int z_bits = 0;
    std::vector<std::vector<double>> rows;  // rows[x][z], each row sums to 1
    std::size_t component_count = 1;

    SimulatorKernel(int xb, int zb, std::vector<std::vector<double>> r, std::size_t components = 1)
        : x_bits(xb), z_bits(zb), rows(std::move(r)), component_count(components) {
        detail::check_bits(x_bits);
        detail::check_bits(z_bits);
        detail::check_bits(x_bits + z_bits);
        if (rows.size() != (std::size_t{1} << x_bits))
            throw invalid_parameter("SimulatorKernel: row count != 2^x_bits");
        for (const auto& row : rows) {
            if (row.size() != (std::size_t{1} << z_bits))
                throw invalid_parameter("SimulatorKernel: row size != 2^z_bits");
            double s = 0.0;
            for (double v : row) {
                if (v < -kMassSlack) throw invalid_parameter("SimulatorKernel: negative row mass");
                s += v;
            }
            if (s < 1.0 - kNormTol || s > 1.0 + kNormTol)
                throw invalid_parameter("SimulatorKernel: row mass != 1");
        }
    }

    /// Deterministic kernel x -> choice[x].
    static SimulatorKernel deterministic(int xb, int zb, const std::vector<std::size_t>& choice) {
        std::vector<std::vector<double>> rows(std::size_t{1} << xb,
                                              std::vector<double>(std::size_t{1} << zb, 0.0));
        if (choice.size() != rows.size())
            throw invalid_parameter("SimulatorKernel: choice size != 2^x_bits");
        for (std::size_t x = 0; x < rows.size(); ++x) {
            if (choice[x] >= rows[x].size()) throw invalid_parameter("SimulatorKernel: choice out of range");
            rows[x][choice[x]] = 1.0;
        }
        return SimulatorKernel(xb, zb, std::move(rows));
    }

    std::size_t x_size() const { return rows.size(); }
    std::size_t z_size() const { return rows.empty() ? 0 : rows.front().size(); }

    /// Row-wise mixture theta*this + (1-theta)*other.
    SimulatorKernel mix(double theta, const SimulatorKernel& other) const {
        if (x_bits != other.x_bits || z_bits != other.z_bits)
            throw domain_mismatch("SimulatorKernel::mix: shapes differ");
        std::vector<std::vector<double>> out(rows.size());
        for (std::size_t x = 0; x < rows.size(); ++x) {
            out[x].resize(rows[x].size());
            for (std::size_t z = 0; z < rows[x].size(); ++z)
                out[x][z] = theta * rows[x][z] + (1.0 - theta) * other.rows[x][z];
        }
        return SimulatorKernel(x_bits, z_bits, std::move(out),
                               component_count + other.component_count);
    }

    /// Joint law of (X, K(X)) for X distributed as x_marginal.
    /// Rows are nudged by ulps so marginal_x() of the result reproduces
    /// x_marginal bit for bit: a kernel must never alter X, even in floats.
    JointDistribution joint_with(const FiniteDistribution& x_marginal) const {
        if (x_marginal.bit_width() != x_bits)
            throw domain_mismatch("SimulatorKernel::joint_with: x domain differs");
        std::vector<double> m;
        m.reserve(x_size() * z_size());
        for (std::size_t x = 0; x < x_size(); ++x)
            for (std::size_t z = 0; z < z_size(); ++z) m.push_back(x_marginal[x] * rows[x][z]);
        for (std::size_t x = 0; x < x_size(); ++x) {
            double* row = m.data() + (x << z_bits);
            const double target = x_marginal[x];
            for (int pass = 0; pass < 8; ++pass) {
                double s = 0.0;  // same order marginal_x() uses
                for (std::size_t z = 0; z < z_size(); ++z) s += row[z];
                if (s == target) break;
                std::size_t arg = 0;
                for (std::size_t z = 1; z < z_size(); ++z)
                    if (row[z] > row[arg]) arg = z;
                row[arg] += target - s;
            }
        }
        return JointDistribution(x_bits, z_bits, std::move(m));
    }
};

}  // namespace mml
