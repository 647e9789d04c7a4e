#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btlab/core.hpp"
#include "btlab/env.hpp"
#include "btlab/exp3.hpp"
#include "btlab/oracle.hpp"
#include "btlab/random.hpp"

namespace btlab {

// Schedule: K = max(2, ceil(c_k T^{1/4})), N = ceil(c_n T^{1/2}),
// beta = c_beta (N K + K sqrt(T ln(1/delta)) + T / K).
struct ScheduleOverrides {
    double c_k = 1.0;
    double c_n = 1.0;
    double c_beta = 1.0;
    // Constant inside the optimistic-profit confidence logarithm; 6 and 8
    // are both in circulation for this bonus, 6 is the default.
    double confidence_log_const = 6.0;
};

struct LearnerParams {
    std::int64_t horizon = 0;
    double delta = 0.0;
    int grid_k = 0;
    std::int64_t explore_n = 0;
    double budget_target = 0.0;
    ScheduleOverrides overrides;
};

LearnerParams configure(std::int64_t horizon, double delta, ScheduleOverrides overrides = {});

// Phase 1: exponential-weights profit collection over the near-diagonal
// additive-multiplicative grid, until the realized budget reaches its target.
class ProfitMaxPhase {
public:
    ProfitMaxPhase(std::vector<PricePair> arms, double budget_target, std::int64_t horizon);

    // Feeds back the trade bit of the previously posted pair, then returns
    // the next pair, or nothing once the budget target is met.
    std::optional<PricePair> next(RandomStream& rng, std::optional<bool> prev_traded);

    double collected() const { return budget_; }
    std::int64_t rounds_played() const { return rounds_; }
    std::span<const PricePair> arms() const { return arms_; }

private:
    std::vector<PricePair> arms_;
    Exp3Ix bandit_;
    double target_;
    double budget_ = 0.0;
    std::int64_t rounds_ = 0;
    PricePair last_pair_{};
    bool awaiting_ = false;
};

// Phase 2: pure exploration with uniform probe prices. Each of the 2K anchor
// sweeps reuses its N feedback bits for a whole row (or column) of the grid,
// producing tables of empirical means with denominator exactly N.
class ExplorationPhase {
public:
    ExplorationPhase(Grid grid, std::int64_t n_per_anchor);

    std::optional<PricePair> next(RandomStream& rng, std::optional<bool> prev_traded);

    bool complete() const { return fed_ >= total_rounds(); }
    std::int64_t total_rounds() const { return 2 * static_cast<std::int64_t>(grid_.per_axis()) * n_; }
    std::int64_t n_per_anchor() const { return n_; }
    const std::vector<std::int64_t>& l_counts() const { return l_counts_; }
    const std::vector<std::int64_t>& r_counts() const { return r_counts_; }
    std::vector<double> l_hat() const;
    std::vector<double> r_hat() const;

private:
    Grid grid_;
    std::int64_t n_;
    std::int64_t posted_ = 0;
    std::int64_t fed_ = 0;
    double last_probe_ = 0.0;
    std::vector<std::int64_t> l_counts_;  // [p index][q index], flattened
    std::vector<std::int64_t> r_counts_;
};

// Optimistic profit estimate: 1 while unvisited, otherwise the empirical
// mean plus a clipped confidence bonus.
double optimistic_profit(double profit_sum, std::int64_t visits, std::int64_t horizon, int grid_k,
                         double delta, double confidence_log_const = 6.0);

// Phase 3: constrained bandit optimization. Rewards are the fixed optimistic
// L/R tables plus the per-pair optimistic profit; each round solves the
// simplex LP with the optimistic budget constraint and samples from its
// optimizer.
class ExploitPhase {
public:
    ExploitPhase(Grid grid, std::vector<double> l_hat, std::vector<double> r_hat,
                 std::int64_t n_per_anchor, std::int64_t horizon, double delta,
                 double confidence_log_const = 6.0);

    PricePair next(RandomStream& rng, std::optional<bool> prev_traded);

    double optimistic_profit_at(std::size_t index) const;
    std::span<const double> l_bar() const { return l_bar_; }
    std::span<const double> r_bar() const { return r_bar_; }
    std::span<const std::int64_t> visits() const { return visits_; }
    std::span<const double> profit_sums() const { return profit_sums_; }
    double min_constraint_slack() const { return min_slack_; }
    std::int64_t lp_fallbacks() const { return lp_fallbacks_; }

private:
    void resolve_lp();

    Grid grid_;
    std::vector<double> l_bar_, r_bar_, pro_bar_, rewards_;
    std::vector<double> profit_sums_;
    std::vector<std::int64_t> visits_;
    double bonus_log_ = 0.0;
    bool uniform_round_ = true;  // the first pair is drawn uniformly
    std::size_t last_index_ = 0;
    SparseLpSolution gamma_{};
    double min_slack_ = std::numeric_limits<double>::infinity();
    std::int64_t lp_fallbacks_ = 0;
};

enum class PhaseTag { profit_max, explore, exploit, probe, commit, fixed_price };
std::string_view phase_token(PhaseTag tag);
PhaseTag phase_from_token(std::string_view token);

struct RoundRecord {
    std::int64_t round = 0;
    PhaseTag phase = PhaseTag::fixed_price;
    double p = 0.0;
    double q = 0.0;
    bool traded = false;
    double realized_profit = 0.0;
    double expected_gft = 0.0;
};

struct RunLog {
    std::vector<RoundRecord> rounds;
    double realized_gft_total = 0.0;  // simulator-side, not learner-observable

    std::int64_t rounds_in(PhaseTag tag) const;
    double final_profit() const;
    double expected_gft_total() const;
};

void write_runlog_csv(const RunLog& log, const std::filesystem::path& path);
RunLog read_runlog_csv(const std::filesystem::path& path);

// The full three-phase episode. The environment and the learner draw from
// disjoint sub-streams of `rng`, so valuation sequences are identical across
// algorithms under one seed.
RunLog run_episode(const JointValuationModel& model, const LearnerParams& params,
                   RandomStream rng);

}  // namespace btlab
