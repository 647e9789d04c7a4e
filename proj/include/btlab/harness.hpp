#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btlab/baselines.hpp"
#include "btlab/env.hpp"
#include "btlab/learner.hpp"

namespace btlab {

enum class Algorithm { gbb_three_phase, fixed_price, diagonal_etc };

struct ExperimentConfig {
    // Builtin name ("product-uniform", "tilted-smooth", "two-cluster",
    // "separation", "needle") or a path to an instance file.
    std::string instance = "product-uniform";
    double needle_eps = 1.0 / 1024.0;
    double needle_u = 0.0;

    Algorithm algorithm = Algorithm::gbb_three_phase;
    // Fixed price for the fixed-price algorithm; negative means "use the
    // oracle-best diagonal grid price".
    double fixed_price = -1.0;
    int fixed_price_grid_k = 101;

    std::vector<std::int64_t> horizons;
    std::vector<std::uint64_t> seeds;
    double delta = 0.1;
    ScheduleOverrides overrides;
    // Probe budget multiplier for the diagonal comparator; negative means
    // "share c_n with the learner".
    double baseline_c_n = -1.0;

    int k_ref = 501;
    std::optional<double> benchmark_override;

    std::filesystem::path output_dir = "out";
    int threads = 0;  // 0 = hardware concurrency
    bool write_runlogs = false;
    bool write_budget_series = false;

    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

JointValuationModel resolve_instance(const ExperimentConfig& config);
// Named instances used across the experiments; the benchmark suite is the
// three bounded-density entries.
JointValuationModel builtin_instance(const std::string& name);
std::vector<std::string> benchmark_suite_names();

// Benchmark value the regret is measured against: a configured override, the
// fine-grid reference for bounded densities, or the exact atomic optimum for
// point-mass instances.
double resolve_benchmark(const JointValuationModel& model, const ExperimentConfig& config);

struct CellStats {
    std::int64_t horizon = 0;
    std::uint64_t seed = 0;
    double pseudo_regret = 0.0;
    double final_profit = 0.0;
    double realized_gft_regret = 0.0;
    std::int64_t rounds_profit_max = 0;
    std::int64_t rounds_explore = 0;
    std::int64_t rounds_exploit = 0;
    std::int64_t rounds_probe = 0;
    std::int64_t rounds_commit = 0;
    std::int64_t rounds_fixed = 0;
    std::vector<std::pair<std::int64_t, double>> budget_series;  // optional, downsampled
};

struct HorizonAggregate {
    std::int64_t horizon = 0;
    double mean = 0.0;
    double p10 = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double mean_final_profit = 0.0;
    double gbb_fraction = 0.0;  // share of seeds with final profit >= 0
};

struct FitResult {
    double slope = 0.0;
    double slope_stderr = 0.0;
    int points_used = 0;
    int points_excluded = 0;
};

struct RegretReport {
    std::string instance;
    std::string algorithm;
    double benchmark = 0.0;
    double delta = 0.0;
    std::vector<CellStats> cells;            // ordered by (horizon, seed)
    std::vector<HorizonAggregate> per_horizon;
    std::optional<FitResult> fit;            // present with >= 3 horizons
};

RegretReport run_experiment(const ExperimentConfig& config);

// Least-squares slope of ln(regret) on ln(T). Nonpositive regret values are
// excluded (with a note on stderr) and counted in the result.
FitResult fit_scaling_exponent(std::span<const std::pair<double, double>> points);

struct BudgetTrajectory {
    std::vector<double> cumulative;
    bool final_negative = false;
};
BudgetTrajectory budget_trajectory(const RunLog& log);

enum class OutputFormat { csv, json };
void emit_outputs(const RegretReport& report, OutputFormat format,
                  const std::filesystem::path& dir);

std::string algorithm_token(Algorithm a);

}  // namespace btlab
