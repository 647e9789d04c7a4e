#include "btlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "btlab/oracle.hpp"

namespace btlab {

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string algorithm_token(Algorithm a) {
    switch (a) {
        case Algorithm::gbb_three_phase: return "gbb-3phase";
        case Algorithm::fixed_price: return "fixed-price";
        case Algorithm::diagonal_etc: return "diagonal-etc";
    }
    return "gbb-3phase";
}

namespace {

Algorithm algorithm_from_token(const std::string& token) {
    if (token == "gbb-3phase") return Algorithm::gbb_three_phase;
    if (token == "fixed-price") return Algorithm::fixed_price;
    if (token == "diagonal-etc") return Algorithm::diagonal_etc;
    throw InvalidParameterError("unknown algorithm: " + token);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (horizons.empty()) throw InvalidParameterError("config needs at least one horizon");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw InvalidParameterError("horizons must be >= 1");
        if (i > 0 && horizons[i] <= horizons[i - 1]) {
            throw InvalidParameterError("horizons must be strictly increasing");
        }
    }
    if (seeds.empty()) std::cerr << "note: empty seed list, nothing will run\n";
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidParameterError("seeds must be distinct");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameterError("delta must lie in (0, 1)");
    if (k_ref < 2) throw InvalidParameterError("k_ref must be >= 2");
    if (algorithm == Algorithm::fixed_price && fixed_price > 1.0) {
        throw InvalidParameterError("fixed price must lie in [0, 1]");
    }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InstanceParseError(std::string("invalid config: ") + e.what(), 1,
                                 static_cast<int>(e.byte));
    }
    ExperimentConfig cfg;
    try {
        cfg.instance = doc.at("instance").get<std::string>();
        if (doc.contains("instance_params")) {
            const auto& p = doc.at("instance_params");
            if (p.contains("eps")) cfg.needle_eps = p.at("eps").get<double>();
            if (p.contains("u")) cfg.needle_u = p.at("u").get<double>();
        }
        cfg.algorithm = algorithm_from_token(doc.at("algorithm").get<std::string>());
        if (doc.contains("price")) cfg.fixed_price = doc.at("price").get<double>();
        cfg.horizons = doc.at("horizons").get<std::vector<std::int64_t>>();
        cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.delta = doc.at("delta").get<double>();
        if (doc.contains("c_k")) cfg.overrides.c_k = doc.at("c_k").get<double>();
        if (doc.contains("c_n")) cfg.overrides.c_n = doc.at("c_n").get<double>();
        if (doc.contains("c_beta")) cfg.overrides.c_beta = doc.at("c_beta").get<double>();
        if (doc.contains("ucb_log_const")) {
            cfg.overrides.confidence_log_const = doc.at("ucb_log_const").get<double>();
        }
        if (doc.contains("baseline_c_n")) cfg.baseline_c_n = doc.at("baseline_c_n").get<double>();
        if (doc.contains("k_ref")) cfg.k_ref = doc.at("k_ref").get<int>();
        if (doc.contains("benchmark")) cfg.benchmark_override = doc.at("benchmark").get<double>();
        if (doc.contains("output_dir")) {
            cfg.output_dir = doc.at("output_dir").get<std::string>();
        }
        if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
        if (doc.contains("runlogs")) cfg.write_runlogs = doc.at("runlogs").get<bool>();
        if (doc.contains("budget_series")) {
            cfg.write_budget_series = doc.at("budget_series").get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InstanceParseError(std::string("invalid config: ") + e.what(), 1, 1);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InstanceParseError("cannot open config file: " + path.string(), 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

JointValuationModel builtin_instance(const std::string& name) {
    if (name == "product-uniform") return JointValuationModel::product_uniform();
    if (name == "tilted-smooth") {
        // Mild positive correlation between buyer value and the gap b - s.
        const double c = 8.0 / 9.0;
        std::vector<std::vector<double>> cells(4, std::vector<double>(4, 0.0));
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                cells[a][b] = c * (0.5 + (b >= a ? static_cast<double>(b - a) : 0.0));
            }
        }
        return JointValuationModel::cell_density(std::move(cells));
    }
    if (name == "two-cluster") {
        // Background noise plus a block of cheap sellers facing rich buyers.
        std::vector<std::vector<double>> cells(4, std::vector<double>(4, 0.4));
        for (int a = 0; a < 2; ++a) {
            for (int b = 2; b < 4; ++b) cells[a][b] = 2.8;
        }
        return JointValuationModel::cell_density(std::move(cells));
    }
    if (name == "separation") {
        // Two disjoint gain opportunities; capturing both requires posting
        // money-losing price pairs, so the budget-balanced-in-expectation
        // optimum strictly mixes off-diagonal pairs. The wide spread between
        // the clusters keeps the discretized optimum close to the continuum
        // one across the grid resolutions the schedule visits.
        return JointValuationModel::point_masses(
            {{0.0, 0.2, 0.5}, {0.8, 1.0, 0.5}});
    }
    throw InvalidParameterError("unknown builtin instance: " + name);
}

std::vector<std::string> benchmark_suite_names() {
    return {"product-uniform", "tilted-smooth", "two-cluster"};
}

JointValuationModel resolve_instance(const ExperimentConfig& config) {
    if (config.instance == "needle") {
        return make_needle_instance(config.needle_eps, config.needle_u);
    }
    if (config.instance == "product-uniform" || config.instance == "tilted-smooth" ||
        config.instance == "two-cluster" || config.instance == "separation") {
        return builtin_instance(config.instance);
    }
    return load_instance(config.instance);
}

double resolve_benchmark(const JointValuationModel& model, const ExperimentConfig& config) {
    if (config.benchmark_override) return *config.benchmark_override;
    if (std::isfinite(model.density_bound())) return reference_opt(model, config.k_ref);
    if (model.kind() == ModelKind::point_mass_mixture) return opt_point_mass_exact(model).value;
    throw UnsupportedBenchmarkError("no benchmark available for this instance");
}

namespace {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(count));
    if (n <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<std::pair<std::int64_t, double>> downsample_budget(const RunLog& log) {
    std::vector<std::pair<std::int64_t, double>> series;
    const std::int64_t total = static_cast<std::int64_t>(log.rounds.size());
    if (total == 0) return series;
    const std::int64_t stride = std::max<std::int64_t>(1, total / 1024);
    double acc = 0.0;
    for (std::int64_t t = 0; t < total; ++t) {
        acc += log.rounds[static_cast<std::size_t>(t)].realized_profit;
        if ((t + 1) % stride == 0 || t + 1 == total) series.emplace_back(t + 1, acc);
    }
    return series;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

RegretReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const JointValuationModel model = resolve_instance(config);
    const double benchmark = resolve_benchmark(model, config);

    RegretReport report;
    report.instance = config.instance;
    report.algorithm = algorithm_token(config.algorithm);
    report.benchmark = benchmark;
    report.delta = config.delta;

    struct Cell {
        std::int64_t horizon;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::int64_t t : config.horizons) {
        for (std::uint64_t s : config.seeds) cells.push_back(Cell{t, s});
    }
    report.cells.resize(cells.size());

    const bool keep_logs = config.write_runlogs || config.write_budget_series;
    std::vector<RunLog> logs(keep_logs ? cells.size() : 0);

    parallel_for(cells.size(), config.threads, [&](std::size_t idx) {
        const Cell& cell = cells[idx];
        RandomStream rng = RandomStream(cell.seed).split(static_cast<std::uint64_t>(cell.horizon));
        RunLog log;
        switch (config.algorithm) {
            case Algorithm::gbb_three_phase: {
                const LearnerParams params = configure(cell.horizon, config.delta, config.overrides);
                log = run_episode(model, params, rng);
                break;
            }
            case Algorithm::fixed_price: {
                const Policy policy = config.fixed_price >= 0.0
                                          ? Policy::fixed_price(config.fixed_price)
                                          : Policy::oracle_best_fixed(model, config.fixed_price_grid_k);
                log = evaluate_policy(model, policy, cell.horizon, rng);
                break;
            }
            case Algorithm::diagonal_etc: {
                ScheduleOverrides ov = config.overrides;
                if (config.baseline_c_n > 0.0) ov.c_n = config.baseline_c_n;
                const LearnerParams params = configure(cell.horizon, config.delta, ov);
                const Policy policy = Policy::diagonal_etc(params.grid_k, params.explore_n);
                log = evaluate_policy(model, policy, cell.horizon, rng);
                break;
            }
        }
        CellStats stats;
        stats.horizon = cell.horizon;
        stats.seed = cell.seed;
        stats.pseudo_regret =
            static_cast<double>(cell.horizon) * benchmark - log.expected_gft_total();
        stats.final_profit = log.final_profit();
        stats.realized_gft_regret =
            static_cast<double>(cell.horizon) * benchmark - log.realized_gft_total;
        stats.rounds_profit_max = log.rounds_in(PhaseTag::profit_max);
        stats.rounds_explore = log.rounds_in(PhaseTag::explore);
        stats.rounds_exploit = log.rounds_in(PhaseTag::exploit);
        stats.rounds_probe = log.rounds_in(PhaseTag::probe);
        stats.rounds_commit = log.rounds_in(PhaseTag::commit);
        stats.rounds_fixed = log.rounds_in(PhaseTag::fixed_price);
        if (config.write_budget_series) stats.budget_series = downsample_budget(log);
        report.cells[idx] = std::move(stats);
        if (keep_logs) logs[idx] = std::move(log);
    });

    for (std::int64_t t : config.horizons) {
        HorizonAggregate agg;
        agg.horizon = t;
        std::vector<double> regrets;
        double profit_sum = 0.0;
        int nonneg = 0;
        int count = 0;
        for (const CellStats& c : report.cells) {
            if (c.horizon != t) continue;
            regrets.push_back(c.pseudo_regret);
            profit_sum += c.final_profit;
            if (c.final_profit >= 0.0) ++nonneg;
            ++count;
        }
        if (count == 0) continue;
        std::sort(regrets.begin(), regrets.end());
        double total = 0.0;
        for (double r : regrets) total += r;
        agg.mean = total / static_cast<double>(count);
        agg.p10 = quantile_sorted(regrets, 0.10);
        agg.p50 = quantile_sorted(regrets, 0.50);
        agg.p90 = quantile_sorted(regrets, 0.90);
        agg.mean_final_profit = profit_sum / static_cast<double>(count);
        agg.gbb_fraction = static_cast<double>(nonneg) / static_cast<double>(count);
        report.per_horizon.push_back(agg);
    }

    if (report.per_horizon.size() >= 3 && !config.seeds.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const HorizonAggregate& a : report.per_horizon) {
            pts.emplace_back(static_cast<double>(a.horizon), a.mean);
        }
        try {
            report.fit = fit_scaling_exponent(pts);
        } catch (const InvalidParameterError&) {
            report.fit.reset();
        }
    }

    std::filesystem::create_directories(config.output_dir);
    emit_outputs(report, OutputFormat::csv, config.output_dir);
    emit_outputs(report, OutputFormat::json, config.output_dir);
    if (keep_logs) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::ostringstream name;
            name << "runlog_T" << cells[i].horizon << "_seed" << cells[i].seed << ".csv";
            if (config.write_runlogs) {
                write_runlog_csv(logs[i], config.output_dir / name.str());
            }
        }
    }
    if (config.write_budget_series) {
        for (const CellStats& c : report.cells) {
            std::ostringstream name;
            name << "budget_T" << c.horizon << "_seed" << c.seed << ".csv";
            std::ofstream out(config.output_dir / name.str());
            out << "round,cumulative_profit\n";
            for (const auto& [t, v] : c.budget_series) {
                out << t << ',' << format_double(v) << '\n';
            }
        }
    }
    return report;
}

FitResult fit_scaling_exponent(std::span<const std::pair<double, double>> points) {
    std::vector<std::pair<double, double>> usable;
    int excluded = 0;
    for (const auto& [t, r] : points) {
        if (!(r > 0.0) || !(t > 0.0)) {
            std::cerr << "fit: excluding nonpositive point (T=" << t << ", regret=" << r << ")\n";
            ++excluded;
            continue;
        }
        usable.emplace_back(std::log(t), std::log(r));
    }
    if (usable.size() < 3) {
        throw InvalidParameterError("scaling fit needs at least 3 positive points");
    }
    const double n = static_cast<double>(usable.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : usable) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : usable) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    FitResult out;
    out.slope = sxy / sxx;
    const double intercept = my - out.slope * mx;
    double ssr = 0.0;
    for (const auto& [x, y] : usable) {
        const double e = y - (intercept + out.slope * x);
        ssr += e * e;
    }
    out.slope_stderr = usable.size() > 2
                     ? std::sqrt(ssr / (n - 2.0) / sxx)
                     : 0.0;
    out.points_used = static_cast<int>(usable.size());
    out.points_excluded = excluded;
    return out;
}

BudgetTrajectory budget_trajectory(const RunLog& log) {
    BudgetTrajectory out;
    out.cumulative.reserve(log.rounds.size());
    double acc = 0.0;
    for (const RoundRecord& r : log.rounds) {
        acc += r.realized_profit;
        out.cumulative.push_back(acc);
    }
    out.final_negative = !out.cumulative.empty() && out.cumulative.back() < 0.0;
    return out;
}

namespace {

void emit_summary_csv(const RegretReport& report, const std::filesystem::path& dir) {
    std::ofstream out(dir / "summary.csv");
    out << "instance,algorithm,T,seed,pseudo_regret,final_profit,realized_gft_regret,"
           "rounds_profit_max,rounds_explore,rounds_exploit,rounds_probe,rounds_commit,"
           "rounds_fixed\n";
    for (const CellStats& c : report.cells) {
        out << report.instance << ',' << report.algorithm << ',' << c.horizon << ',' << c.seed
            << ',' << format_double(c.pseudo_regret) << ',' << format_double(c.final_profit) << ','
            << format_double(c.realized_gft_regret) << ',' << c.rounds_profit_max << ','
            << c.rounds_explore << ',' << c.rounds_exploit << ',' << c.rounds_probe << ','
            << c.rounds_commit << ',' << c.rounds_fixed << '\n';
    }
    for (const HorizonAggregate& a : report.per_horizon) {
        for (const auto& [label, value] :
             std::initializer_list<std::pair<const char*, double>>{
                 {"mean", a.mean}, {"p10", a.p10}, {"p50", a.p50}, {"p90", a.p90}}) {
            out << report.instance << ',' << report.algorithm << ',' << a.horizon << ',' << label
                << ',' << format_double(value) << ',' << format_double(a.mean_final_profit) << ','
                << "" << ',' << "" << ',' << "" << ',' << "" << ',' << "" << ',' << "" << ',' << ""
                << '\n';
        }
    }
    std::ofstream series(dir / "regret_vs_T.csv");
    series << "T,mean_pseudo_regret\n";
    for (const HorizonAggregate& a : report.per_horizon) {
        series << a.horizon << ',' << format_double(a.mean) << '\n';
    }
}

ordered_json report_to_json(const RegretReport& report) {
    ordered_json doc;
    doc["schema"] = "btlab-report-v1";
    doc["instance"] = report.instance;
    doc["algorithm"] = report.algorithm;
    doc["benchmark"] = report.benchmark;
    doc["delta"] = report.delta;
    ordered_json cells = ordered_json::array();
    for (const CellStats& c : report.cells) {
        ordered_json cell;
        cell["T"] = c.horizon;
        cell["seed"] = c.seed;
        cell["pseudo_regret"] = c.pseudo_regret;
        cell["final_profit"] = c.final_profit;
        cell["realized_gft_regret"] = c.realized_gft_regret;
        cell["rounds"] = {
            {"profit_max", c.rounds_profit_max}, {"explore", c.rounds_explore},
            {"exploit", c.rounds_exploit},       {"probe", c.rounds_probe},
            {"commit", c.rounds_commit},         {"fixed", c.rounds_fixed},
        };
        cells.push_back(cell);
    }
    doc["cells"] = cells;
    ordered_json aggs = ordered_json::array();
    for (const HorizonAggregate& a : report.per_horizon) {
        ordered_json agg;
        agg["T"] = a.horizon;
        agg["mean"] = a.mean;
        agg["p10"] = a.p10;
        agg["p50"] = a.p50;
        agg["p90"] = a.p90;
        agg["mean_final_profit"] = a.mean_final_profit;
        agg["gbb_fraction"] = a.gbb_fraction;
        aggs.push_back(agg);
    }
    doc["per_horizon"] = aggs;
    if (report.fit) {
        doc["fit"] = {{"slope", report.fit->slope},
                      {"stderr", report.fit->slope_stderr},
                      {"points_used", report.fit->points_used},
                      {"points_excluded", report.fit->points_excluded}};
    }
    return doc;
}

}  // namespace

void emit_outputs(const RegretReport& report, OutputFormat format,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (format == OutputFormat::csv) {
        emit_summary_csv(report, dir);
        return;
    }
    std::ofstream out(dir / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json under " + dir.string());
    out << report_to_json(report).dump(2) << '\n';
}

}  // namespace btlab
