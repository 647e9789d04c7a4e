#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "btlab/oracle.hpp"
#include "support.hpp"

using namespace btlab;

TEST_CASE("lp: feasible argmax wins outright") {
    const std::vector<double> r = {1.0, 0.0};
    const std::vector<double> pi = {1.0, 1.0};
    const auto out = solve_constrained_simplex_lp(r, pi);
    CHECK(out.objective == 1.0);
    CHECK(out.weights == std::vector<double>{1.0, 0.0});
    CHECK(out.support == std::vector<std::size_t>{0});
    CHECK(out.constraint_slack == 1.0);
}

TEST_CASE("lp: tight two-point mixture") {
    const std::vector<double> r = {1.0, 0.0};
    const std::vector<double> pi = {-1.0, 1.0};
    const auto out = solve_constrained_simplex_lp(r, pi);
    CHECK(out.objective == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out.weights[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::fabs(out.constraint_slack) <= 1e-15);
    CHECK(out.support.size() == 2);
}

TEST_CASE("lp: three arms against a dense alpha sweep") {
    const std::vector<double> r = {0.9, 0.5, 0.1};
    const std::vector<double> pi = {-1.0, -0.1, 1.0};
    const auto out = solve_constrained_simplex_lp(r, pi);
    // Brute force over all pairs and a 10^4-point mixing grid.
    double best = -1.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (pi[i] >= 0.0) best = std::max(best, r[i]);
        for (std::size_t j = 0; j < r.size(); ++j) {
            for (int step = 0; step <= 10000; ++step) {
                const double a = step / 10000.0;
                if (a * pi[i] + (1.0 - a) * pi[j] < 0.0) continue;
                best = std::max(best, a * r[i] + (1.0 - a) * r[j]);
            }
        }
    }
    CHECK(out.objective >= best - 1e-3);
    CHECK(out.objective <= best + 1e-9);
}

TEST_CASE("lp: all profits negative is infeasible") {
    const std::vector<double> r = {1.0, 2.0};
    const std::vector<double> pi = {-0.5, -0.1};
    CHECK_THROWS_AS(solve_constrained_simplex_lp(r, pi), InfeasibleLpError);
}

TEST_CASE("lp: input validation") {
    CHECK_THROWS_AS(solve_constrained_simplex_lp({}, {}), InvalidParameterError);
    const std::vector<double> r = {1.0};
    const std::vector<double> bad = {std::nan("")};
    CHECK_THROWS_AS(solve_constrained_simplex_lp(r, bad), InvalidParameterError);
}

TEST_CASE("lp matches the pair-enumeration oracle on random instances") {
    RandomStream rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform01() * 50);
        std::vector<double> r(m), pi(m);
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = rng.uniform01();
            pi[i] = 2.0 * rng.uniform01() - 1.0;
        }
        pi[static_cast<std::size_t>(rng.uniform01() * m)] = rng.uniform01();  // keep feasible
        const auto fast = solve_constrained_simplex_lp(r, pi);
        const auto slow = btlab_test::lp_enumeration_oracle(r, pi);
        CHECK(fast.objective == slow.objective);
        CHECK(fast.weights == slow.weights);
        CHECK(fast.support == slow.support);
    }
}

TEST_CASE("lp optimality certificate") {
    RandomStream rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform01() * 40);
        std::vector<double> r(m), pi(m);
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = rng.uniform01();
            pi[i] = 2.0 * rng.uniform01() - 1.0;
        }
        pi[0] = rng.uniform01();
        const auto out = solve_constrained_simplex_lp(r, pi);
        CHECK(out.support.size() <= 2);
        CHECK(out.constraint_slack >= -1e-10);
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += out.weights[i] * r[i];
        CHECK(std::fabs(dot - out.objective) <= 1e-12);
        for (std::size_t i = 0; i < m; ++i) {
            if (pi[i] >= 0.0) CHECK(r[i] <= out.objective + 1e-12);
        }
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t i = static_cast<std::size_t>(rng.uniform01() * m);
            const std::size_t j = static_cast<std::size_t>(rng.uniform01() * m);
            const double a = rng.uniform01();
            if (a * pi[i] + (1.0 - a) * pi[j] < 0.0) continue;
            const double value = a * r[i] + (1.0 - a) * r[j];
            CHECK(value <= out.objective + 1e-9);
        }
    }
}

TEST_CASE("opt_k dominates the diagonal point masses") {
    RandomStream rng(5);
    const auto model = btlab_test::random_cell_density(rng, 4);
    const Grid g2 = make_uniform_grid(2);
    const auto out = opt_k(model, g2);
    CHECK(out.value >= model.exact_gft({0.0, 0.0}) - 1e-12);
    CHECK(out.value >= model.exact_gft({1.0, 1.0}) - 1e-12);
}

TEST_CASE("opt_k on product uniform dominates the midpoint price") {
    const auto model = JointValuationModel::product_uniform();
    const auto out = opt_k(model, make_uniform_grid(21));
    CHECK(out.value >= model.exact_gft({0.5, 0.5}) - 1e-12);
    // The symmetric instance gains nothing from leaving the diagonal.
    CHECK(out.value == doctest::Approx(0.125).epsilon(1e-9));
    double pro = expected_pro_of(model, out.distribution.pairs(), out.distribution.weights());
    CHECK(pro >= -1e-10);
}

TEST_CASE("opt_k on the needle reaches the hand-computed sliver mixture") {
    const auto model = make_needle_instance(1.0 / 32.0, 0.0);
    // 17-point grid contains 1/8, 3/8 and 5/8 exactly; mixing the costly
    // full-gains corner with the single-gain profit pair gives 5/64.
    const auto out = opt_k(model, make_uniform_grid(17));
    CHECK(out.value >= 5.0 / 64.0 - 1e-12);
}

TEST_CASE("opt_k is monotone under nested grid refinement") {
    RandomStream rng(6);
    std::vector<JointValuationModel> models;
    models.push_back(JointValuationModel::product_uniform());
    models.push_back(btlab_test::random_cell_density(rng, 5));
    for (const auto& model : models) {
        double prev = -1.0;
        for (int k : {2, 3, 5, 9, 17}) {  // each K-1 divides the next
            const double value = opt_k(model, make_uniform_grid(k)).value;
            CHECK(value >= prev - 1e-12);
            prev = value;
        }
    }
}

TEST_CASE("reference benchmark is stable in the grid resolution") {
    const auto model = JointValuationModel::product_uniform();
    const double v251 = reference_opt(model, 251);
    const double v501 = reference_opt(model, 501);
    CHECK(std::fabs(v251 - v501) <= 0.01);
}

TEST_CASE("reference benchmark refuses unbounded densities") {
    const auto needle = make_needle_instance(1.0 / 1024.0, 0.0);
    CHECK_THROWS_AS(reference_opt(needle, 501), UnsupportedBenchmarkError);
}

TEST_CASE("exact atomic benchmark on the needle") {
    for (double u : {-1.0 / 64.0, 0.0, 1.0 / 64.0}) {
        const auto model = make_needle_instance(1.0 / 1024.0, u);
        const auto out = opt_point_mass_exact(model);
        CHECK(out.support.size() <= 2);
        // Mixture value derived from the region payoffs: the corner pair
        // with all gains trading loses 3/16 per round while the one-gain
        // profit pair earns (1/4 +- u)/4; tight mixing yields >= 5/64.
        CHECK(out.value >= 5.0 / 64.0 - 1e-12);
        double expected_best = 0.0;
        {
            const double gain_corner = model.exact_gft({0.625 + u, 0.375 + u});
            const double loss = model.exact_pro({0.625 + u, 0.375 + u});
            const double best_profit = std::max(model.exact_pro({0.125, 0.375 + u}),
                                                model.exact_pro({0.625 + u, 0.875}));
            const double gain_profit = 1.0 / 16.0;
            const double alpha = best_profit / (best_profit - loss);
            expected_best = alpha * gain_corner + (1.0 - alpha) * gain_profit;
        }
        CHECK(out.value >= expected_best - 1e-12);
    }
    CHECK_THROWS_AS(opt_point_mass_exact(JointValuationModel::product_uniform()),
                    UnsupportedOracleError);
}

TEST_CASE("projection maps grid-point masses to themselves") {
    const Grid g = make_uniform_grid(5);
    const auto gamma = JointValuationModel::point_masses({{0.25, 0.75, 1.0}});
    const auto out = project_to_grid(gamma, g);
    CHECK(out.residual == 0.0);
    CHECK(out.weights[g.index_of(1, 3)] == 1.0);
    const auto dist = out.distribution();
    CHECK(dist.weight(g.index_of(1, 3)) == 1.0);
}

TEST_CASE("projection pulls interior offsets to the stated cell anchor") {
    const int k = 5;
    const Grid g = make_uniform_grid(k);
    const double p = g.coordinate(2), q = g.coordinate(1);
    const auto gamma = JointValuationModel::point_masses(
        {{p - 1.0 / (2.0 * k), q + 1.0 / (2.0 * k), 1.0}});
    const auto out = project_to_grid(gamma, g);
    CHECK(out.residual == 0.0);
    CHECK(out.weights[g.index_of(2, 1)] == 1.0);
}

TEST_CASE("projection reports mass falling in the uncovered slivers") {
    const int k = 5;
    const Grid g = make_uniform_grid(k);
    // Between coordinate 1/4 and the next cell's lower edge 1/2 - 1/5 = 0.3.
    const auto gamma = JointValuationModel::point_masses({{0.27, 0.5, 1.0}});
    const auto out = project_to_grid(gamma, g);
    CHECK(out.residual == 1.0);
    CHECK_THROWS_AS(out.distribution(), InvalidParameterError);
}

TEST_CASE("projection never splits a point mass") {
    RandomStream rng(8);
    const Grid g = make_uniform_grid(11);
    for (int rep = 0; rep < 100; ++rep) {
        const auto gamma = btlab_test::random_point_masses(rng, 4);
        const auto out = project_to_grid(gamma, g);
        int positive = 0;
        double total = out.residual;
        for (double w : out.weights) {
            if (w > 0.0) ++positive;
            total += w;
        }
        CHECK(positive <= 4);
        CHECK(std::fabs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("projection bounds for uniform gamma on product uniform") {
    const auto model = JointValuationModel::product_uniform();
    const auto gamma = JointValuationModel::product_uniform();  // uniform over price pairs
    const double gamma_gft = expected_gft_under(model, gamma);
    const double sigma = model.density_bound();
    for (int k : {5, 11, 21}) {
        const Grid g = make_uniform_grid(k);
        const auto out = project_to_grid(gamma, g);
        const double proj_gft = expected_gft_of(model, g.pairs(), out.weights);
        const double proj_pro = expected_pro_of(model, g.pairs(), out.weights);
        CHECK(gamma_gft - proj_gft <= 2.0 * sigma / (k - 1) + 1e-10);
        CHECK(proj_pro >= -2.0 * sigma / (k - 1) - 1e-10);
    }
}

TEST_CASE("best fixed SBB price on the needle stays below the region cap") {
    for (double u : {-1.0 / 64.0, 0.0, 1.0 / 64.0}) {
        const auto model = make_needle_instance(1.0 / 128.0, u);
        const auto best = best_fixed_sbb_price(model, 101);
        CHECK(best.value <= 1.0 / 16.0 + std::fabs(u) / 4.0 + 1e-12);
    }
}

TEST_CASE("best fixed SBB price covers the midpoint on product uniform") {
    const auto model = JointValuationModel::product_uniform();
    const auto best = best_fixed_sbb_price(model, 101);
    CHECK(best.value >= model.exact_gft({0.5, 0.5}) - 1e-12);
}

TEST_CASE("best fixed SBB price on a single atom") {
    const auto model = JointValuationModel::point_masses({{0.1, 0.9, 1.0}});
    const auto best = best_fixed_sbb_price(model, 11);
    CHECK(best.value == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(best.price >= 0.1);
    CHECK(best.price <= 0.9);
}

TEST_CASE("mc estimate of the profit is exactly zero on the diagonal") {
    const auto model = JointValuationModel::product_uniform();
    RandomStream rng(13);
    const auto est = mc_estimate(model, {0.4, 0.4}, McQuantity::pro, 10000, rng);
    CHECK(est.mean == 0.0);
}

TEST_CASE("mc estimate covers the exact value at the stated confidence") {
    const auto model = JointValuationModel::product_uniform();
    int covered = 0;
    for (int seed = 0; seed < 100; ++seed) {
        RandomStream rng(1000 + seed);
        const auto est = mc_estimate(model, {1.0, 0.0}, McQuantity::gft, 1000000, rng);
        if (std::fabs(est.mean - 0.0) <= est.half_width) ++covered;
    }
    CHECK(covered >= 99);
}

TEST_CASE("mc estimate of L agrees with the exact oracle") {
    const auto model = JointValuationModel::product_uniform();
    RandomStream rng(19);
    const PricePair pair{0.7, 0.2};
    const auto est = mc_estimate(model, pair, McQuantity::l, 400000, rng);
    CHECK(std::fabs(est.mean - model.exact_l(pair)) <= est.half_width);
}

TEST_CASE("pair-distribution expectations match Monte Carlo") {
    RandomStream rng(21);
    const auto val = btlab_test::random_cell_density(rng, 4);
    const auto gamma = JointValuationModel::cell_density({{0.0, 4.0}, {0.0, 0.0}});
    const double exact_gft = expected_gft_under(val, gamma);
    const double exact_pro = expected_pro_under(val, gamma);
    double sg = 0.0, sp = 0.0;
    const int n = 400000;
    RandomStream gamma_rng(22);
    RandomStream val_rng(23);
    for (int i = 0; i < n; ++i) {
        const auto [p, q] = gamma.sample(gamma_rng);
        const auto [s, b] = val.sample(val_rng);
        if (!one_bit_feedback(s, b, {p, q})) continue;
        sg += b - s;
        sp += q - p;
    }
    CHECK(std::fabs(sg / n - exact_gft) <= 0.005);
    CHECK(std::fabs(sp / n - exact_pro) <= 0.005);
}

TEST_CASE("pair-distribution expectations reduce to sums for atom lists") {
    RandomStream rng(25);
    const auto val = btlab_test::random_cell_density(rng, 3);
    const auto gamma = JointValuationModel::point_masses({{0.2, 0.6, 0.5}, {0.5, 0.9, 0.5}});
    const double direct =
        0.5 * val.exact_gft({0.2, 0.6}) + 0.5 * val.exact_gft({0.5, 0.9});
    CHECK(expected_gft_under(val, gamma) == doctest::Approx(direct).epsilon(1e-14));
}
