#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "btlab/harness.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    btlab::ExperimentConfig config = btlab::load_experiment_config(config_path);
    if (const char* root = std::getenv("BTLAB_OUTPUT_ROOT")) {
        if (config.output_dir.is_relative()) {
            config.output_dir = std::filesystem::path(root) / config.output_dir;
        }
    }
    const btlab::RegretReport report = btlab::run_experiment(config);
    std::cout << "instance " << report.instance << ", algorithm " << report.algorithm
              << ", benchmark per-round value " << report.benchmark << "\n";
    for (const auto& agg : report.per_horizon) {
        std::cout << "  T=" << agg.horizon << " mean_regret=" << agg.mean
                  << " median=" << agg.p50 << " mean_final_profit=" << agg.mean_final_profit
                  << " gbb_fraction=" << agg.gbb_fraction << "\n";
    }
    if (report.fit) {
        std::cout << "  log-log slope " << report.fit->slope << " (stderr "
                  << report.fit->slope_stderr << ")\n";
    }
    std::cout << "outputs written to " << config.output_dir.string() << "\n";
    return 0;
}

int cmd_fit(const std::string& input_path) {
    std::ifstream in(input_path);
    if (!in) {
        std::cerr << "cannot open " << input_path << "\n";
        return 1;
    }
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<double, double>> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string t, r;
        std::getline(row, t, ',');
        std::getline(row, r, ',');
        points.emplace_back(std::stod(t), std::stod(r));
    }
    const btlab::FitResult fit = btlab::fit_scaling_exponent(points);
    std::cout << "slope " << fit.slope << " stderr " << fit.slope_stderr << " points "
              << fit.points_used << " excluded " << fit.points_excluded << "\n";
    return 0;
}

int cmd_inspect(const std::string& runlog_path) {
    const btlab::RunLog log = btlab::read_runlog_csv(runlog_path);
    std::cout << "rounds: " << log.rounds.size() << "\n";
    for (const auto tag :
         {btlab::PhaseTag::profit_max, btlab::PhaseTag::explore, btlab::PhaseTag::exploit,
          btlab::PhaseTag::probe, btlab::PhaseTag::commit, btlab::PhaseTag::fixed_price}) {
        const auto n = log.rounds_in(tag);
        if (n > 0) std::cout << "  " << btlab::phase_token(tag) << ": " << n << "\n";
    }
    const btlab::BudgetTrajectory budget = btlab::budget_trajectory(log);
    std::cout << "final cumulative profit: " << (budget.cumulative.empty() ? 0.0 : budget.cumulative.back())
              << (budget.final_negative ? "  (negative)" : "") << "\n";
    std::cout << "total expected GFT of posted pairs: " << log.expected_gft_total() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bilateral trade simulation lab"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();

    std::string fit_input;
    CLI::App* fit = app.add_subcommand("fit", "fit a log-log scaling exponent to (T, regret) CSV");
    fit->add_option("--input", fit_input, "two-column CSV with header")->required();

    std::string runlog_path;
    CLI::App* inspect = app.add_subcommand("inspect", "summarize a run log");
    inspect->add_option("--runlog", runlog_path, "run log CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (fit->parsed()) return cmd_fit(fit_input);
        if (inspect->parsed()) return cmd_inspect(runlog_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
