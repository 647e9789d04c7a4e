#include "btlab/baselines.hpp"

#include <algorithm>

#include "btlab/oracle.hpp"

namespace btlab {

Policy Policy::fixed_price(double price) {
    if (!(price >= 0.0 && price <= 1.0)) {
        throw InvalidParameterError("fixed price must lie in [0, 1]");
    }
    Policy p;
    p.kind_ = PolicyKind::fixed_price;
    p.price_ = price;
    return p;
}

Policy Policy::oracle_best_fixed(const JointValuationModel& model, int grid_k) {
    Policy p;
    p.kind_ = PolicyKind::oracle_best_fixed;
    p.price_ = best_fixed_sbb_price(model, grid_k).price;
    p.grid_k_ = grid_k;
    return p;
}

Policy Policy::diagonal_etc(int grid_k, std::int64_t n_per_anchor) {
    if (grid_k < 2) throw InvalidParameterError("diagonal comparator needs grid_k >= 2");
    if (n_per_anchor < 1) throw InvalidParameterError("diagonal comparator needs n >= 1");
    Policy p;
    p.kind_ = PolicyKind::diagonal_etc;
    p.grid_k_ = grid_k;
    p.n_ = n_per_anchor;
    return p;
}

namespace {

// Episode state for the diagonal explore-then-commit comparator. The probe
// sweeps mirror the pure-exploration routine but only the K diagonal table
// entries are kept; one-bit feedback cannot reveal the GFT of a diagonal
// price from diagonal posts alone, so the probes do leave the diagonal.
class DiagonalEtcState {
public:
    DiagonalEtcState(Grid grid, std::int64_t n) : grid_(std::move(grid)), n_(n) {
        l_counts_.assign(grid_.per_axis(), 0);
        r_counts_.assign(grid_.per_axis(), 0);
    }

    std::pair<PricePair, PhaseTag> next(RandomStream& rng, std::optional<bool> prev_traded) {
        const int k = grid_.per_axis();
        const std::int64_t probe_rounds = 2 * static_cast<std::int64_t>(k) * n_;
        if (fed_ < posted_ && prev_traded.has_value()) {
            const std::int64_t step = fed_;
            if (*prev_traded) {
                if (step < static_cast<std::int64_t>(k) * n_) {
                    const int j = static_cast<int>(step / n_);
                    if (last_probe_ <= grid_.coordinate(j)) ++l_counts_[j];
                } else {
                    const int i = static_cast<int>((step - static_cast<std::int64_t>(k) * n_) / n_);
                    if (last_probe_ >= grid_.coordinate(i)) ++r_counts_[i];
                }
            }
            ++fed_;
        }
        if (posted_ < probe_rounds) {
            const std::int64_t step = posted_++;
            last_probe_ = rng.uniform01();
            if (step < static_cast<std::int64_t>(k) * n_) {
                const int j = static_cast<int>(step / n_);
                return {PricePair{last_probe_, grid_.coordinate(j)}, PhaseTag::probe};
            }
            const int i = static_cast<int>((step - static_cast<std::int64_t>(k) * n_) / n_);
            return {PricePair{grid_.coordinate(i), last_probe_}, PhaseTag::probe};
        }
        if (!committed_) {
            int best = 0;
            std::int64_t best_count = l_counts_[0] + r_counts_[0];
            for (int i = 1; i < k; ++i) {
                const std::int64_t c = l_counts_[i] + r_counts_[i];
                if (c > best_count) {
                    best_count = c;
                    best = i;
                }
            }
            commit_price_ = grid_.coordinate(best);
            committed_ = true;
        }
        return {PricePair{commit_price_, commit_price_}, PhaseTag::commit};
    }

private:
    Grid grid_;
    std::int64_t n_;
    std::int64_t posted_ = 0;
    std::int64_t fed_ = 0;
    double last_probe_ = 0.0;
    std::vector<std::int64_t> l_counts_;
    std::vector<std::int64_t> r_counts_;
    bool committed_ = false;
    double commit_price_ = 0.0;
};

}  // namespace

RunLog evaluate_policy(const JointValuationModel& model, const Policy& policy,
                       std::int64_t horizon, RandomStream rng) {
    if (horizon < 1) throw InvalidParameterError("horizon must be >= 1");
    RandomStream env_rng = rng.split(1);
    RandomStream agent_rng = rng.split(2);

    std::optional<DiagonalEtcState> etc;
    if (policy.kind() == PolicyKind::diagonal_etc) {
        etc.emplace(make_uniform_grid(policy.grid_k()), policy.n_per_anchor());
    }

    RunLog log;
    log.rounds.reserve(static_cast<std::size_t>(horizon));
    std::optional<bool> pending;
    for (std::int64_t t = 1; t <= horizon; ++t) {
        PricePair pair{policy.price(), policy.price()};
        PhaseTag tag = PhaseTag::fixed_price;
        if (etc) {
            auto [etc_pair, etc_tag] = etc->next(agent_rng, pending);
            pair = etc_pair;
            tag = etc_tag;
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
