#include "btlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "btlab/errors.hpp"

namespace btlab {

namespace {

void validate_lp_inputs(std::span<const double> rewards, std::span<const double> profits) {
    if (rewards.empty() || rewards.size() != profits.size()) {
        throw InvalidParameterError("rewards and profits must be nonempty and equally sized");
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (!std::isfinite(rewards[i]) || !std::isfinite(profits[i])) {
            throw InvalidParameterError("rewards and profits must be finite");
        }
    }
}

struct HullPoint {
    double x;  // profit
    double y;  // reward
    std::size_t index;
};

inline double cross(const HullPoint& a, const HullPoint& b, const HullPoint& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

}  // namespace

SparseLpSolution solve_constrained_simplex_lp_sparse(std::span<const double> rewards,
                                                     std::span<const double> profits) {
    validate_lp_inputs(rewards, profits);
    const std::size_t n = rewards.size();

    std::size_t best = 0;
    double best_profit = profits[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (rewards[i] > rewards[best]) best = i;
        best_profit = std::max(best_profit, profits[i]);
    }
    if (best_profit < 0.0) {
        throw InfeasibleLpError("all profits negative: constrained simplex LP is infeasible");
    }
    if (profits[best] >= 0.0) {
        SparseLpSolution out;
        out.index = {best, best};
        out.weight = {1.0, 0.0};
        out.support_size = 1;
        out.objective = rewards[best];
        out.constraint_slack = profits[best];
        return out;
    }

    // The optimum is the upper convex hull of (profit, reward) points
    // evaluated at profit = 0: the hull edge crossing zero is the best
    // tight two-point mixture.
    std::vector<HullPoint> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {profits[i], rewards[i], i};
    std::sort(pts.begin(), pts.end(), [](const HullPoint& a, const HullPoint& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y > b.y;
        return a.index < b.index;
    });

    std::vector<HullPoint> hull;
    hull.reserve(pts.size());
    for (const HullPoint& p : pts) {
        if (!hull.empty() && hull.back().x == p.x) continue;  // keep top of vertical ties
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= 0.0) {
            hull.pop_back();
        }
        hull.push_back(p);
    }

    std::size_t m = 0;
    while (m < hull.size() && hull[m].x < 0.0) ++m;
    // A negative-profit point exists (the reward argmax) and a nonnegative
    // one exists (feasibility), so the crossing edge is well defined.
    const HullPoint& neg = hull[m - 1];
    const HullPoint& pos = hull[m];

    const double alpha = pos.x / (pos.x - neg.x);  // weight on the negative-profit index
    SparseLpSolution out;
    out.objective = (1.0 - alpha) * pos.y + alpha * neg.y;
    out.constraint_slack = (1.0 - alpha) * pos.x + alpha * neg.x;
    if (alpha == 0.0) {
        out.index = {pos.index, pos.index};
        out.weight = {1.0, 0.0};
        out.support_size = 1;
    } else {
        out.index = {pos.index, neg.index};
        out.weight = {1.0 - alpha, alpha};
        out.support_size = 2;
    }
    return out;
}

ConstrainedLpResult solve_constrained_simplex_lp(std::span<const double> rewards,
                                                 std::span<const double> profits) {
    const SparseLpSolution s = solve_constrained_simplex_lp_sparse(rewards, profits);
    ConstrainedLpResult out;
    out.weights.assign(rewards.size(), 0.0);
    for (int i = 0; i < s.support_size; ++i) out.weights[s.index[i]] += s.weight[i];
    out.objective = s.objective;
    out.constraint_slack = s.constraint_slack;
    for (std::size_t i = 0; i < out.weights.size(); ++i) {
        if (out.weights[i] > 0.0) out.support.push_back(i);
    }
    return out;
}

OptResult opt_k(const JointValuationModel& model, const Grid& grid) {
    const auto& pairs = grid.pairs();
    std::vector<double> rewards(pairs.size());
    std::vector<double> profits(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rewards[i] = model.exact_gft(pairs[i]);
        profits[i] = model.exact_pro(pairs[i]);
    }
    ConstrainedLpResult lp = solve_constrained_simplex_lp(rewards, profits);
    return OptResult{lp.objective, GridDistribution(grid.shared_pairs(), std::move(lp.weights))};
}

double reference_opt(const JointValuationModel& model, int k_ref) {
    if (!std::isfinite(model.density_bound())) {
        throw UnsupportedBenchmarkError(
            "reference benchmark needs a finite density bound; use the exact atomic benchmark "
            "for point-mass instances");
    }
    if (k_ref < 2) throw InvalidParameterError("reference grid resolution must be >= 2");
    return opt_k(model, make_uniform_grid(k_ref)).value;
}

AtomicOptResult opt_point_mass_exact(const JointValuationModel& model) {
    if (model.kind() != ModelKind::point_mass_mixture) {
        throw UnsupportedOracleError("exact atomic benchmark requires a point-mass mixture");
    }
    std::vector<double> ps = {0.0};
    std::vector<double> qs = {1.0};
    for (const Atom& a : model.atoms()) {
        ps.push_back(a.s);
        qs.push_back(a.b);
    }
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

    std::vector<PricePair> candidates;
    candidates.reserve(ps.size() * qs.size());
    for (double p : ps) {
        for (double q : qs) candidates.push_back(PricePair{p, q});
    }
    std::vector<double> rewards(candidates.size());
    std::vector<double> profits(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        rewards[i] = model.exact_gft(candidates[i]);
        profits[i] = model.exact_pro(candidates[i]);
    }
    const SparseLpSolution s = solve_constrained_simplex_lp_sparse(rewards, profits);
    AtomicOptResult out;
    out.value = s.objective;
    for (int i = 0; i < s.support_size; ++i) {
        out.support.emplace_back(candidates[s.index[i]], s.weight[i]);
    }
    return out;
}

GridDistribution ProjectionResult::distribution() const {
    if (residual > 1e-12) {
        throw InvalidParameterError("projection lost mass; no proper grid distribution exists");
    }
    std::vector<double> w = weights;
    double total = 0.0;
    for (double v : w) total += v;
    if (total > 0.0 && std::fabs(total - 1.0) <= 1e-12) return GridDistribution(grid_pairs, w);
    throw InvalidParameterError("projection weights do not form a distribution");
}

ProjectionResult project_to_grid(const JointValuationModel& pair_distribution, const Grid& grid) {
    const int k = grid.per_axis();
    const double cell = 1.0 / static_cast<double>(k);
    ProjectionResult out;
    out.grid_pairs = grid.shared_pairs();
    out.weights.assign(grid.size(), 0.0);

    if (pair_distribution.kind() == ModelKind::point_mass_mixture) {
        for (const Atom& a : pair_distribution.atoms()) {
            // Seller side: smallest grid coordinate >= x, within (p - 1/K, p].
            int i = static_cast<int>(std::floor(a.s * (k - 1)));
            i = std::clamp(i - 1, 0, k - 1);
            while (i < k && grid.coordinate(i) < a.s) ++i;
            const bool p_ok = i < k && (grid.coordinate(i) - a.s) < cell;
            // Buyer side: largest grid coordinate <= y, within [q, q + 1/K).
            int j = static_cast<int>(std::ceil(a.b * (k - 1)));
            j = std::clamp(j + 1, 0, k - 1);
            while (j >= 0 && grid.coordinate(j) > a.b) --j;
            const bool q_ok = j >= 0 && (a.b - grid.coordinate(j)) < cell;
            if (p_ok && q_ok) {
                out.weights[grid.index_of(i, j)] += a.mass;
            } else {
                out.residual += a.mass;
            }
        }
        return out;
    }

    const int m = pair_distribution.cells_per_axis();
    const double scale = 1.0 / static_cast<double>(m);
    double captured = 0.0;
    for (int i = 0; i < k; ++i) {
        const double p_hi = grid.coordinate(i);
        const double p_lo = p_hi - cell;
        for (int j = 0; j < k; ++j) {
            const double q_lo = grid.coordinate(j);
            const double q_hi = q_lo + cell;
            double w = 0.0;
            for (int a = 0; a < m; ++a) {
                const double e0 = a * scale, e1 = (a + 1) * scale;
                const double lp = std::max(0.0, std::min(e1, p_hi) - std::max(e0, p_lo));
                if (lp == 0.0) continue;
                for (int b = 0; b < m; ++b) {
                    const double d = pair_distribution.cell(a, b);
                    if (d == 0.0) continue;
                    const double f0 = b * scale, f1 = (b + 1) * scale;
                    const double lq = std::max(0.0, std::min(f1, q_hi) - std::max(f0, q_lo));
                    if (lq == 0.0) continue;
                    w += d * lp * lq;
                }
            }
            out.weights[grid.index_of(i, j)] = w;
            captured += w;
        }
    }
    out.residual = std::max(0.0, 1.0 - captured);
    return out;
}

DiagonalBest best_fixed_sbb_price(const JointValuationModel& model, int k) {
    const Grid grid = make_uniform_grid(k);
    DiagonalBest best{grid.coordinate(0),
                      model.exact_gft(PricePair{grid.coordinate(0), grid.coordinate(0)})};
    for (int i = 1; i < k; ++i) {
        const double c = grid.coordinate(i);
        const double v = model.exact_gft(PricePair{c, c});
        if (v > best.value) best = DiagonalBest{c, v};
    }
    return best;
}

McEstimate mc_estimate(const JointValuationModel& model, PricePair pair, McQuantity quantity,
                       std::int64_t n, RandomStream& rng) {
    if (n < 1) throw InvalidParameterError("monte carlo estimate needs n >= 1");
    double total = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
        const auto [s, b] = model.sample(rng);
        if (!one_bit_feedback(s, b, pair)) continue;
        switch (quantity) {
            case McQuantity::gft: total += b - s; break;
            case McQuantity::pro: total += pair.q - pair.p; break;
            case McQuantity::l: total += pair.p - s; break;
            case McQuantity::r: total += b - pair.q; break;
        }
    }
    McEstimate out;
    out.mean = total / static_cast<double>(n);
    out.half_width = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
    return out;
}

double expected_gft_of(const JointValuationModel& model, std::span<const PricePair> pairs,
                       std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (weights[i] != 0.0) total += weights[i] * model.exact_gft(pairs[i]);
    }
    return total;
}

double expected_pro_of(const JointValuationModel& model, std::span<const PricePair> pairs,
                       std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (weights[i] != 0.0) total += weights[i] * model.exact_pro(pairs[i]);
    }
    return total;
}

namespace {

// One-dimensional primitives for integrating the per-cell oracle pieces over
// a price interval. Each valuation cell contributes separable factors in p
// and q; these are their antiderivatives over [x0, x1].

// integral of max(0, min(p, a1) - a0) dp
double int_len_below(double x0, double x1, double a0, double a1) {
    const double lo = std::clamp(x0, a0, a1);
    const double hi = std::clamp(x1, a0, a1);
    double v = 0.5 * ((hi - a0) * (hi - a0) - (lo - a0) * (lo - a0));
    if (x1 > a1) v += (x1 - std::max(x0, a1)) * (a1 - a0);
    return v;
}

// integral of p * max(0, min(p, a1) - a0) dp
double int_p_len_below(double x0, double x1, double a0, double a1) {
    const double lo = std::clamp(x0, a0, a1);
    const double hi = std::clamp(x1, a0, a1);
    double v = (hi * hi * hi - lo * lo * lo) / 3.0 - 0.5 * a0 * (hi * hi - lo * lo);
    if (x1 > a1) {
        const double r0 = std::max(x0, a1);
        v += 0.5 * (a1 - a0) * (x1 * x1 - r0 * r0);
    }
    return v;
}

// integral of (clamp(p, a0, a1)^2 - a0^2) / 2 dp
double int_halfsq_below(double x0, double x1, double a0, double a1) {
    const double lo = std::clamp(x0, a0, a1);
    const double hi = std::clamp(x1, a0, a1);
    double v = (hi * hi * hi - lo * lo * lo) / 6.0 - 0.5 * a0 * a0 * (hi - lo);
    if (x1 > a1) v += (x1 - std::max(x0, a1)) * 0.5 * (a1 * a1 - a0 * a0);
    return v;
}

// integral of max(0, c1 - max(q, c0)) dq
double int_len_above(double y0, double y1, double c0, double c1) {
    double v = 0.0;
    if (y0 < c0) v += (std::min(y1, c0) - y0) * (c1 - c0);
    const double lo = std::clamp(y0, c0, c1);
    const double hi = std::clamp(y1, c0, c1);
    v += c1 * (hi - lo) - 0.5 * (hi * hi - lo * lo);
    return v;
}

// integral of q * max(0, c1 - max(q, c0)) dq
double int_q_len_above(double y0, double y1, double c0, double c1) {
    double v = 0.0;
    if (y0 < c0) {
        const double t = std::min(y1, c0);
        v += 0.5 * (c1 - c0) * (t * t - y0 * y0);
    }
    const double lo = std::clamp(y0, c0, c1);
    const double hi = std::clamp(y1, c0, c1);
    v += 0.5 * c1 * (hi * hi - lo * lo) - (hi * hi * hi - lo * lo * lo) / 3.0;
    return v;
}

// integral of (c1^2 - clamp(q, c0, c1)^2) / 2 dq
double int_halfsq_above(double y0, double y1, double c0, double c1) {
    double v = 0.0;
    if (y0 < c0) v += (std::min(y1, c0) - y0) * 0.5 * (c1 * c1 - c0 * c0);
    const double lo = std::clamp(y0, c0, c1);
    const double hi = std::clamp(y1, c0, c1);
    v += 0.5 * c1 * c1 * (hi - lo) - (hi * hi * hi - lo * lo * lo) / 6.0;
    return v;
}

enum class PairExpectation { gft, pro };

double expected_under_impl(const JointValuationModel& val, const JointValuationModel& gamma,
                           PairExpectation which) {
    if (gamma.kind() == ModelKind::point_mass_mixture) {
        double total = 0.0;
        for (const Atom& a : gamma.atoms()) {
            const PricePair pair{a.s, a.b};
            total += a.mass *
                     (which == PairExpectation::gft ? val.exact_gft(pair) : val.exact_pro(pair));
        }
        return total;
    }

    const int mg = gamma.cells_per_axis();
    const double gscale = 1.0 / static_cast<double>(mg);
    double total = 0.0;
    for (int ga = 0; ga < mg; ++ga) {
        const double e0 = ga * gscale, e1 = (ga + 1) * gscale;
        for (int gb = 0; gb < mg; ++gb) {
            const double g = gamma.cell(ga, gb);
            if (g == 0.0) continue;
            const double f0 = gb * gscale, f1 = (gb + 1) * gscale;

            double acc = 0.0;
            if (val.kind() == ModelKind::point_mass_mixture) {
                for (const Atom& at : val.atoms()) {
                    const double lp = std::max(0.0, e1 - std::max(e0, at.s));
                    if (lp == 0.0) continue;
                    const double lq = std::max(0.0, std::min(f1, at.b) - f0);
                    if (lq == 0.0) continue;
                    if (which == PairExpectation::gft) {
                        acc += at.mass * (at.b - at.s) * lp * lq;
                    } else {
                        const double p0 = std::max(e0, at.s);
                        const double q1 = std::min(f1, at.b);
                        const double int_q = 0.5 * (q1 * q1 - f0 * f0);
                        const double int_p = 0.5 * (e1 * e1 - p0 * p0);
                        acc += at.mass * (lp * int_q - int_p * lq);
                    }
                }
            } else {
                const int mv = val.cells_per_axis();
                const double vscale = 1.0 / static_cast<double>(mv);
                for (int a = 0; a < mv; ++a) {
                    const double a0 = a * vscale, a1 = (a + 1) * vscale;
                    const double ia = int_len_below(e0, e1, a0, a1);
                    const double ipa = int_p_len_below(e0, e1, a0, a1);
                    const double id = int_halfsq_below(e0, e1, a0, a1);
                    if (ia == 0.0 && ipa == 0.0 && id == 0.0) continue;
                    for (int b = 0; b < mv; ++b) {
                        const double d = val.cell(a, b);
                        if (d == 0.0) continue;
                        const double c0 = b * vscale, c1 = (b + 1) * vscale;
                        if (which == PairExpectation::gft) {
                            const double ib = int_halfsq_above(f0, f1, c0, c1);
                            const double ic = int_len_above(f0, f1, c0, c1);
                            acc += d * (ia * ib - id * ic);
                        } else {
                            const double ic = int_len_above(f0, f1, c0, c1);
                            const double iqc = int_q_len_above(f0, f1, c0, c1);
                            acc += d * (ia * iqc - ipa * ic);
                        }
                    }
                }
            }
            total += g * acc;
        }
    }
    return total;
}

}  // namespace

double expected_gft_under(const JointValuationModel& valuations,
                          const JointValuationModel& pair_distribution) {
    return expected_under_impl(valuations, pair_distribution, PairExpectation::gft);
}

double expected_pro_under(const JointValuationModel& valuations,
                          const JointValuationModel& pair_distribution) {
    return expected_under_impl(valuations, pair_distribution, PairExpectation::pro);
}

}  // namespace btlab
