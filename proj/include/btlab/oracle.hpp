#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "btlab/core.hpp"
#include "btlab/env.hpp"
#include "btlab/random.hpp"

namespace btlab {

// Solution of max <gamma, rewards> over the simplex s.t. <gamma, profits> >= 0.
// At most two indices carry weight: either the unconstrained argmax when it
// is feasible, or a mixture of one nonnegative-profit and one negative-profit
// index with the constraint tight.
struct ConstrainedLpResult {
    std::vector<double> weights;
    double objective = 0.0;
    std::vector<std::size_t> support;
    double constraint_slack = 0.0;
};

// Sparse form used on hot paths; same semantics.
struct SparseLpSolution {
    std::array<std::size_t, 2> index{};
    std::array<double, 2> weight{};
    int support_size = 0;
    double objective = 0.0;
    double constraint_slack = 0.0;
};

SparseLpSolution solve_constrained_simplex_lp_sparse(std::span<const double> rewards,
                                                     std::span<const double> profits);
ConstrainedLpResult solve_constrained_simplex_lp(std::span<const double> rewards,
                                                 std::span<const double> profits);

// Value and optimizer of the expected-GFT LP over a uniform grid, with
// expected profit constrained to be nonnegative.
struct OptResult {
    double value = 0.0;
    GridDistribution distribution;
};
OptResult opt_k(const JointValuationModel& model, const Grid& grid);

// Fine-grid stand-in for the continuum benchmark; requires a finite density
// bound so that the grid value provably approaches the continuum one.
double reference_opt(const JointValuationModel& model, int k_ref = 501);

// Exact benchmark for atom mixtures: the trade pattern is piecewise constant
// between atom coordinates, so the LP over all (atom s-value, atom b-value)
// price pairs attains the continuum optimum.
struct AtomicOptResult {
    double value = 0.0;
    std::vector<std::pair<PricePair, double>> support;
};
AtomicOptResult opt_point_mass_exact(const JointValuationModel& model);

// Projection of a distribution over price pairs onto a uniform grid, using
// the half-open cell (p - 1/K, p] x [q, q + 1/K) around each grid point.
// Cells of width 1/K on a grid of pitch 1/(K-1) leave slivers uncovered;
// mass falling there is reported as residual rather than renormalized, so
// the weight vector may sum to less than one.
struct ProjectionResult {
    SharedPairs grid_pairs;
    std::vector<double> weights;
    double residual = 0.0;

    // Valid only when essentially no mass was lost.
    GridDistribution distribution() const;
};
ProjectionResult project_to_grid(const JointValuationModel& pair_distribution, const Grid& grid);

struct DiagonalBest {
    double price = 0.0;
    double value = 0.0;
};
// Best strongly-budget-balanced grid price: argmax over diagonal points of
// the exact GFT, ties resolved toward the lowest price.
DiagonalBest best_fixed_sbb_price(const JointValuationModel& model, int k);

enum class McQuantity { gft, pro, l, r };
struct McEstimate {
    double mean = 0.0;
    double half_width = 0.0;  // 99% Hoeffding radius
};
McEstimate mc_estimate(const JointValuationModel& model, PricePair pair, McQuantity quantity,
                       std::int64_t n, RandomStream& rng);

// Expectations of grid-supported distributions under exact oracles.
double expected_gft_of(const JointValuationModel& model, std::span<const PricePair> pairs,
                       std::span<const double> weights);
double expected_pro_of(const JointValuationModel& model, std::span<const PricePair> pairs,
                       std::span<const double> weights);

// Expectations E_(p,q)~gamma[GFT(p,q)] and E[PRO(p,q)] for gamma given as a
// point-mass list or cell density over the unit square; closed form.
double expected_gft_under(const JointValuationModel& valuations,
                          const JointValuationModel& pair_distribution);
double expected_pro_under(const JointValuationModel& valuations,
                          const JointValuationModel& pair_distribution);

}  // namespace btlab
