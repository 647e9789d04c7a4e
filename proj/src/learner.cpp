#include "btlab/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace btlab {

namespace {

std::int64_t ceil_guarded(double v) {
    return static_cast<std::int64_t>(std::ceil(v - 1e-9 * std::max(1.0, std::fabs(v))));
}

}  // namespace

LearnerParams configure(std::int64_t horizon, double delta, ScheduleOverrides overrides) {
    if (horizon < 1) throw InvalidParameterError("horizon must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameterError("delta must lie in (0, 1)");
    if (!(overrides.c_k > 0.0) || !(overrides.c_n > 0.0) || !(overrides.c_beta >= 0.0)) {
        throw InvalidParameterError("schedule multipliers must be positive (c_beta may be 0)");
    }
    if (!(overrides.confidence_log_const > 0.0)) {
        throw InvalidParameterError("confidence log constant must be positive");
    }
    LearnerParams params;
    params.horizon = horizon;
    params.delta = delta;
    params.overrides = overrides;
    const double t = static_cast<double>(horizon);
    params.grid_k = static_cast<int>(std::max<std::int64_t>(
        2, ceil_guarded(overrides.c_k * std::pow(t, 0.25))));
    params.explore_n = std::max<std::int64_t>(1, ceil_guarded(overrides.c_n * std::sqrt(t)));
    const double k = static_cast<double>(params.grid_k);
    params.budget_target =
        overrides.c_beta * (static_cast<double>(params.explore_n) * k +
                            k * std::sqrt(t * std::log(1.0 / delta)) + t / k);
    return params;
}

ProfitMaxPhase::ProfitMaxPhase(std::vector<PricePair> arms, double budget_target,
                               std::int64_t horizon)
    : arms_(std::move(arms)),
      bandit_(arms_.size(),
              std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::size_t>(arms_.size(), 2))) /
                        (static_cast<double>(arms_.size()) * static_cast<double>(std::max<std::int64_t>(horizon, 1)))),
              std::sqrt(2.0 * std::log(static_cast<double>(std::max<std::size_t>(arms_.size(), 2))) /
                        (static_cast<double>(arms_.size()) * static_cast<double>(std::max<std::int64_t>(horizon, 1))))),
      target_(budget_target) {
    if (arms_.empty()) throw InvalidParameterError("profit collection needs at least one arm");
}

std::optional<PricePair> ProfitMaxPhase::next(RandomStream& rng, std::optional<bool> prev_traded) {
    if (awaiting_ && prev_traded.has_value()) {
        const double profit = (last_pair_.q - last_pair_.p) * (*prev_traded ? 1.0 : 0.0);
        budget_ += profit;
        // Profits live in [-1, 1]; the regret minimizer consumes losses in [0, 1].
        bandit_.update((1.0 - profit) / 2.0);
        awaiting_ = false;
    }
    if (budget_ >= target_) return std::nullopt;
    const std::size_t arm = bandit_.sample(rng);
    last_pair_ = arms_[arm];
    awaiting_ = true;
    ++rounds_;
    return last_pair_;
}

ExplorationPhase::ExplorationPhase(Grid grid, std::int64_t n_per_anchor)
    : grid_(std::move(grid)), n_(n_per_anchor) {
    if (n_ < 1) throw InvalidParameterError("exploration needs at least one sample per anchor");
    l_counts_.assign(grid_.size(), 0);
    r_counts_.assign(grid_.size(), 0);
}

std::optional<PricePair> ExplorationPhase::next(RandomStream& rng,
                                                std::optional<bool> prev_traded) {
    const int k = grid_.per_axis();
    if (fed_ < posted_ && prev_traded.has_value()) {
        const std::int64_t step = fed_;
        if (*prev_traded) {
            if (step < static_cast<std::int64_t>(k) * n_) {
                // Row sweep: probe (U, q_j); one bit serves every p >= U.
                const int j = static_cast<int>(step / n_);
                for (int i = 0; i < k; ++i) {
                    if (grid_.coordinate(i) >= last_probe_) ++l_counts_[grid_.index_of(i, j)];
                }
            } else {
                // Column sweep: probe (p_i, V); one bit serves every q <= V.
                const int i = static_cast<int>((step - static_cast<std::int64_t>(k) * n_) / n_);
                for (int j = 0; j < k; ++j) {
                    if (grid_.coordinate(j) <= last_probe_) ++r_counts_[grid_.index_of(i, j)];
                }
            }
        }
        ++fed_;
    }
    if (posted_ >= total_rounds()) return std::nullopt;
    const std::int64_t step = posted_;
    PricePair pair;
    if (step < static_cast<std::int64_t>(k) * n_) {
        const int j = static_cast<int>(step / n_);
        last_probe_ = rng.uniform01();
        pair = PricePair{last_probe_, grid_.coordinate(j)};
    } else {
        const int i = static_cast<int>((step - static_cast<std::int64_t>(k) * n_) / n_);
        last_probe_ = rng.uniform01();
        pair = PricePair{grid_.coordinate(i), last_probe_};
    }
    ++posted_;
    return pair;
}

std::vector<double> ExplorationPhase::l_hat() const {
    std::vector<double> out(l_counts_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>(l_counts_[i]) / static_cast<double>(n_);
    }
    return out;
}

std::vector<double> ExplorationPhase::r_hat() const {
    std::vector<double> out(r_counts_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>(r_counts_[i]) / static_cast<double>(n_);
    }
    return out;
}

double optimistic_profit(double profit_sum, std::int64_t visits, std::int64_t horizon, int grid_k,
                         double delta, double confidence_log_const) {
    if (visits <= 0) return 1.0;
    const double k2 = static_cast<double>(grid_k) * static_cast<double>(grid_k);
    const double log_term =
        std::log(confidence_log_const * static_cast<double>(horizon) * k2 / delta);
    const double bonus = std::min(1.0, std::sqrt(2.0 * log_term / static_cast<double>(visits)));
    return profit_sum / static_cast<double>(visits) + bonus;
}

ExploitPhase::ExploitPhase(Grid grid, std::vector<double> l_hat, std::vector<double> r_hat,
                           std::int64_t n_per_anchor, std::int64_t horizon, double delta,
                           double confidence_log_const)
    : grid_(std::move(grid)), l_bar_(std::move(l_hat)), r_bar_(std::move(r_hat)) {
    const std::size_t m = grid_.size();
    if (l_bar_.size() != m || r_bar_.size() != m) {
        throw InvalidParameterError("estimator tables do not match the grid");
    }
    const double k2 = static_cast<double>(grid_.per_axis()) * static_cast<double>(grid_.per_axis());
    const double lr_bonus = std::sqrt(std::log(4.0 * k2 / delta) / static_cast<double>(n_per_anchor));
    for (double& v : l_bar_) v += lr_bonus;
    for (double& v : r_bar_) v += lr_bonus;
    pro_bar_.assign(m, 1.0);
    rewards_.resize(m);
    for (std::size_t i = 0; i < m; ++i) rewards_[i] = l_bar_[i] + r_bar_[i] + pro_bar_[i];
    profit_sums_.assign(m, 0.0);
    visits_.assign(m, 0);
    bonus_log_ = 2.0 * std::log(confidence_log_const * static_cast<double>(horizon) * k2 / delta);
}

double ExploitPhase::optimistic_profit_at(std::size_t index) const { return pro_bar_[index]; }

void ExploitPhase::resolve_lp() {
    try {
        gamma_ = solve_constrained_simplex_lp_sparse(rewards_, pro_bar_);
    } catch (const InfeasibleLpError&) {
        // Cannot occur while any diagonal pair keeps a positive bonus; kept
        // as a counted fallback in case of numerical surprises.
        ++lp_fallbacks_;
        std::size_t best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        const int k = grid_.per_axis();
        for (int i = 0; i < k; ++i) {
            const std::size_t idx = grid_.index_of(i, i);
            if (pro_bar_[idx] > best_v) {
                best_v = pro_bar_[idx];
                best = idx;
            }
        }
        gamma_ = SparseLpSolution{};
        gamma_.index = {best, best};
        gamma_.weight = {1.0, 0.0};
        gamma_.support_size = 1;
        gamma_.objective = rewards_[best];
        gamma_.constraint_slack = pro_bar_[best];
    }
    double slack = 0.0;
    for (int i = 0; i < gamma_.support_size; ++i) {
        slack += gamma_.weight[i] * pro_bar_[gamma_.index[i]];
    }
    min_slack_ = std::min(min_slack_, slack);
}

PricePair ExploitPhase::next(RandomStream& rng, std::optional<bool> prev_traded) {
    if (prev_traded.has_value()) {
        const PricePair played = grid_.at(last_index_);
        const double profit = (played.q - played.p) * (*prev_traded ? 1.0 : 0.0);
        ++visits_[last_index_];
        profit_sums_[last_index_] += profit;
        const double mean = profit_sums_[last_index_] / static_cast<double>(visits_[last_index_]);
        const double bonus =
            std::min(1.0, std::sqrt(bonus_log_ / static_cast<double>(visits_[last_index_])));
        pro_bar_[last_index_] = mean + bonus;
        rewards_[last_index_] = l_bar_[last_index_] + r_bar_[last_index_] + pro_bar_[last_index_];
        resolve_lp();
        uniform_round_ = false;
    }
    if (uniform_round_) {
        last_index_ = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(grid_.size()));
        if (last_index_ >= grid_.size()) last_index_ = grid_.size() - 1;
    } else {
        if (gamma_.support_size == 1) {
            last_index_ = gamma_.index[0];
        } else {
            const double x = rng.uniform01();
            last_index_ = x < gamma_.weight[0] ? gamma_.index[0] : gamma_.index[1];
        }
    }
    return grid_.at(last_index_);
}

std::string_view phase_token(PhaseTag tag) {
    switch (tag) {
        case PhaseTag::profit_max: return "profit-max";
        case PhaseTag::explore: return "explore";
        case PhaseTag::exploit: return "exploit";
        case PhaseTag::probe: return "probe";
        case PhaseTag::commit: return "commit";
        case PhaseTag::fixed_price: return "fixed";
    }
    return "fixed";
}

PhaseTag phase_from_token(std::string_view token) {
    if (token == "profit-max") return PhaseTag::profit_max;
    if (token == "explore") return PhaseTag::explore;
    if (token == "exploit") return PhaseTag::exploit;
    if (token == "probe") return PhaseTag::probe;
    if (token == "commit") return PhaseTag::commit;
    if (token == "fixed") return PhaseTag::fixed_price;
    throw InvalidParameterError("unknown phase token: " + std::string(token));
}

std::int64_t RunLog::rounds_in(PhaseTag tag) const {
    std::int64_t n = 0;
    for (const RoundRecord& r : rounds) {
        if (r.phase == tag) ++n;
    }
    return n;
}

double RunLog::final_profit() const {
    double total = 0.0;
    for (const RoundRecord& r : rounds) total += r.realized_profit;
    return total;
}

double RunLog::expected_gft_total() const {
    double total = 0.0;
    for (const RoundRecord& r : rounds) total += r.expected_gft;
    return total;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_runlog_csv(const RunLog& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write run log: " + path.string());
    out << "round,phase,p,q,bit,realized_profit,expected_gft\n";
    for (const RoundRecord& r : log.rounds) {
        out << r.round << ',' << phase_token(r.phase) << ',' << format_double(r.p) << ','
            << format_double(r.q) << ',' << (r.traded ? 1 : 0) << ','
            << format_double(r.realized_profit) << ',' << format_double(r.expected_gft) << '\n';
    }
}

RunLog read_runlog_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read run log: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty run log: " + path.string());
    RunLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        RoundRecord r;
        std::getline(row, field, ',');
        r.round = std::stoll(field);
        std::getline(row, field, ',');
        r.phase = phase_from_token(field);
        std::getline(row, field, ',');
        r.p = std::stod(field);
        std::getline(row, field, ',');
        r.q = std::stod(field);
        std::getline(row, field, ',');
        r.traded = field == "1";
        std::getline(row, field, ',');
        r.realized_profit = std::stod(field);
        std::getline(row, field, ',');
        r.expected_gft = std::stod(field);
        log.rounds.push_back(r);
    }
    return log;
}

RunLog run_episode(const JointValuationModel& model, const LearnerParams& params,
                   RandomStream rng) {
    RandomStream env_rng = rng.split(1);
    RandomStream agent_rng = rng.split(2);

    const Grid grid = make_uniform_grid(params.grid_k);
    const AmGrid am = make_am_grid(params.grid_k, std::max<std::int64_t>(params.horizon, 2));
    ProfitMaxPhase profit(am.pairs(), params.budget_target, params.horizon);
    std::optional<ExplorationPhase> explore;
    std::optional<ExploitPhase> exploit;

    RunLog log;
    log.rounds.reserve(static_cast<std::size_t>(params.horizon));
    int stage = 0;
    std::optional<bool> pending;

    for (std::int64_t t = 1; t <= params.horizon; ++t) {
        PricePair pair{};
        PhaseTag tag = PhaseTag::exploit;
        if (stage == 0) {
            if (auto nxt = profit.next(agent_rng, pending)) {
                pair = *nxt;
                tag = PhaseTag::profit_max;
            } else {
                stage = 1;
                pending.reset();
                explore.emplace(grid, params.explore_n);
            }
        }
        if (stage == 1) {
            if (auto nxt = explore->next(agent_rng, pending)) {
                pair = *nxt;
                tag = PhaseTag::explore;
            } else {
                stage = 2;
                pending.reset();
                exploit.emplace(grid, explore->l_hat(), explore->r_hat(), explore->n_per_anchor(),
                                params.horizon, params.delta,
                                params.overrides.confidence_log_const);
            }
        }
        if (stage == 2) {
            pair = exploit->next(agent_rng, pending);
            tag = PhaseTag::exploit;
        }

        const auto [s, b] = model.sample(env_rng);
        const bool bit = one_bit_feedback(s, b, pair);
        pending = bit;
        RoundRecord rec;
        rec.round = t;
        rec.phase = tag;
        rec.p = pair.p;
        rec.q = pair.q;
        rec.traded = bit;
        rec.realized_profit = bit ? pair.q - pair.p : 0.0;
        rec.expected_gft = model.exact_gft(pair);
        log.rounds.push_back(rec);
        if (bit) log.realized_gft_total += b - s;
    }
    return log;
}

}  // namespace btlab
