#pragma once

// Shared test-side oracles: deliberately simple, independent implementations
// used to cross-check the library. Nothing here is part of the shipped API.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "btlab/core.hpp"
#include "btlab/env.hpp"
#include "btlab/oracle.hpp"
#include "btlab/random.hpp"

namespace btlab_test {

// O(M^2) pair-enumeration solver for the constrained simplex LP: the best
// feasible point mass when the reward argmax is feasible, otherwise the best
// tight mixture over all (nonnegative-profit, negative-profit) pairs, ties
// broken toward the lexicographically lowest pair.
inline btlab::ConstrainedLpResult lp_enumeration_oracle(std::span<const double> rewards,
                                                        std::span<const double> profits) {
    const std::size_t n = rewards.size();
    std::size_t best = 0;
    double max_profit = profits[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (rewards[i] > rewards[best]) best = i;
        max_profit = std::max(max_profit, profits[i]);
    }
    if (max_profit < 0.0) throw btlab::InfeasibleLpError("infeasible");
    btlab::ConstrainedLpResult out;
    out.weights.assign(n, 0.0);
    if (profits[best] >= 0.0) {
        out.weights[best] = 1.0;
        out.objective = rewards[best];
        out.support = {best};
        out.constraint_slack = profits[best];
        return out;
    }
    double best_value = -std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    double balpha = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (profits[i] < 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (profits[j] >= 0.0) continue;
            const double alpha = profits[i] / (profits[i] - profits[j]);
            const double value = (1.0 - alpha) * rewards[i] + alpha * rewards[j];
            if (value > best_value) {
                best_value = value;
                bi = i;
                bj = j;
                balpha = alpha;
            }
        }
    }
    out.objective = best_value;
    out.weights[bi] += 1.0 - balpha;
    out.weights[bj] += balpha;
    out.constraint_slack = (1.0 - balpha) * profits[bi] + balpha * profits[bj];
    for (std::size_t i = 0; i < n; ++i) {
        if (out.weights[i] > 0.0) out.support.push_back(i);
    }
    return out;
}

// Independent brute-force generator of the additive-multiplicative grid.
inline std::set<std::pair<double, double>> am_grid_bruteforce(int k, long long horizon) {
    int emax = 0;
    long long v = 1;
    while (v < horizon) {
        v *= 2;
        ++emax;
    }
    std::set<std::pair<double, double>> out;
    for (int j = 0; j < k; ++j) {
        const double anchor = static_cast<double>(j) / static_cast<double>(k - 1);
        for (int e = 0; e <= emax; ++e) {
            const double w = std::ldexp(1.0, -e);
            if (anchor - w >= 0.0) out.insert({anchor - w, anchor});
            if (anchor + w <= 1.0) out.insert({anchor, anchor + w});
        }
    }
    return out;
}

inline btlab::JointValuationModel random_cell_density(btlab::RandomStream& rng, int m) {
    std::vector<std::vector<double>> cells(m, std::vector<double>(m, 0.0));
    double total = 0.0;
    for (auto& row : cells) {
        for (double& d : row) {
            d = rng.uniform01() + 0.05;
            total += d;
        }
    }
    const double scale = static_cast<double>(m) * static_cast<double>(m) / total;
    for (auto& row : cells) {
        for (double& d : row) d *= scale;
    }
    return btlab::JointValuationModel::cell_density(std::move(cells));
}

inline btlab::JointValuationModel random_point_masses(btlab::RandomStream& rng, int count) {
    std::vector<btlab::Atom> atoms(count);
    double total = 0.0;
    for (auto& a : atoms) {
        a.s = rng.uniform01();
        a.b = rng.uniform01();
        a.mass = rng.uniform01() + 0.01;
        total += a.mass;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        atoms[i].mass /= total;
        acc += atoms[i].mass;
    }
    atoms.back().mass = 1.0 - acc;
    return btlab::JointValuationModel::point_masses(std::move(atoms));
}

}  // namespace btlab_test
