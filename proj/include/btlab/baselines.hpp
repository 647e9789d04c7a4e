#pragma once

#include <cstdint>

#include "btlab/env.hpp"
#include "btlab/learner.hpp"

namespace btlab {

enum class PolicyKind { fixed_price, oracle_best_fixed, diagonal_etc };

// Comparator policies. Fixed-price policies post (p, p) every round and
// never move money. The diagonal explore-then-commit comparator estimates
// the two GFT components at every diagonal grid price with anchored probe
// sweeps, then commits to the empirical argmax for the rest of the horizon.
class Policy {
public:
    static Policy fixed_price(double price);
    static Policy oracle_best_fixed(const JointValuationModel& model, int grid_k);
    static Policy diagonal_etc(int grid_k, std::int64_t n_per_anchor);

    PolicyKind kind() const { return kind_; }
    double price() const { return price_; }
    int grid_k() const { return grid_k_; }
    std::int64_t n_per_anchor() const { return n_; }

private:
    Policy() = default;
    PolicyKind kind_ = PolicyKind::fixed_price;
    double price_ = 0.0;
    int grid_k_ = 0;
    std::int64_t n_ = 0;
};

RunLog evaluate_policy(const JointValuationModel& model, const Policy& policy,
                       std::int64_t horizon, RandomStream rng);

}  // namespace btlab
