#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "game_checks.hpp"
#include "oracles.hpp"
#include "uavnet/covert_game.hpp"
#include "uavnet/rng.hpp"
#include "uavnet/units.hpp"

using namespace uavnet;
using Catch::Approx;

namespace {

UavGameParams table_uav(double phi = 1.0) {
    UavGameParams up;
    up.power_cost_coeff = phi;
    up.willie_gain = db_to_linear(1.0);
    up.p_min_w = dbm_to_watts(10.0);
    up.p_max_w = dbm_to_watts(30.0);
    return up;
}

AliceParams table_alice() {
    AliceParams ap;
    ap.mu = 1.0;
    ap.psi = 5.0;
    ap.omega = 1.0;
    ap.noise_gain = db_to_linear(1.0);
    ap.detect_threshold = 0.6;
    ap.noise_sigma = 0.1;
    ap.r_min = 0.1;
    ap.r_max = 20.0;
    ap.budget = 50.0;
    return ap;
}

}  // namespace

TEST_CASE("q function values and identities") {
    CHECK(q_function(0.0) == Approx(0.5).margin(1e-15));
    CHECK(q_function(1.6449) == Approx(0.049995217468346303).margin(1e-12));
    CHECK(q_function(6.0) == Approx(9.8658764503769814e-10).margin(1e-18));
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(-8.0, 8.0);
        CHECK(q_function(x) + q_function(-x) == Approx(1.0).margin(1e-14));
    }
    // quadrature oracle over the density, absolute error budget 1e-12
    for (double x : {-3.0, -1.0, -0.3, 0.0, 0.7, 1.5, 2.5, 4.0}) {
        CHECK(q_function(x) == Approx(oracles::q_upper_tail(x)).margin(1e-12));
    }
    CHECK_THROWS_AS(q_function(std::nan("")), validation_error);
}

TEST_CASE("detection probability pivots at the detector threshold") {
    UavGameParams up = table_uav();
    AliceParams ap = table_alice();
    // P g^2 = eps puts the statistic at the threshold exactly
    const double pivot = ap.detect_threshold / (up.willie_gain * up.willie_gain);
    CHECK(detection_probability(pivot, up, ap) == Approx(0.5).margin(1e-12));

    // silent transmitter: Q(eps / sigma) with eps = 0.6, sigma = 0.1
    up.willie_gain = 1.0;
    CHECK(detection_probability(0.0, up, ap) == Approx(9.8658764503769814e-10).margin(1e-18));
}

TEST_CASE("detection probability increases with power") {
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
        UavGameParams up = game_checks::random_uav_params(rng);
        AliceParams ap = game_checks::random_alice_params(rng);
        // stay on the resolvable part of the tail; past |z| ~ 8 the double
        // rounds to exactly 0 or 1
        const double p1 = rng.uniform(0.0, 0.4);
        const double p2 = p1 + rng.uniform(1e-4, 0.4);
        CHECK(detection_probability(p2, up, ap) > detection_probability(p1, up, ap));
    }
}

TEST_CASE("uav utility closed-form values") {
    UavGameParams up = table_uav(1.0);
    CHECK(uav_utility(0.0, 0.7, up) == 0.0);
    CHECK(uav_utility(0.0, 123.0, up) == 0.0);
    CHECK(uav_utility(0.5, 0.0, up) == Approx(-0.5).epsilon(1e-12));
    CHECK(uav_utility(1.0, 2.0, up) == Approx(0.38629436111989062).epsilon(1e-12));
}

TEST_CASE("uav utility is concave and its power derivative matches r/(1+P) - phi") {
    Rng rng(41);
    for (int i = 0; i < 100; ++i) {
        UavGameParams up = game_checks::random_uav_params(rng);
        const double r = rng.uniform(0.0, 20.0);
        const double p = rng.uniform(0.05, 2.0);
        const double h = 1e-6;
        const double fd =
            (uav_utility(p + h, r, up) - uav_utility(p - h, r, up)) / (2.0 * h);
        const double analytic = r / (1.0 + p) - up.power_cost_coeff;
        CHECK(fd == Approx(analytic).margin(1e-6));
        const double second =
            uav_utility(p + h, r, up) - 2.0 * uav_utility(p, r, up) + uav_utility(p - h, r, up);
        CHECK(second <= 1e-12);
    }
}

TEST_CASE("best response clamps the interior stationary point") {
    UavGameParams up = table_uav(2.0);
    up.p_max_w = 2.0;
    // r = 2 phi puts the stationary point at exactly 1 inside the box
    CHECK(best_response_power(2.0 * up.power_cost_coeff, up) == Approx(1.0).epsilon(1e-15));
    // low rates clamp at the floor
    CHECK(best_response_power(0.0, up) == up.p_min_w);
    CHECK(best_response_power(up.power_cost_coeff * (1.0 + 0.5 * up.p_min_w), up) == up.p_min_w);
    // high rates clamp at the ceiling
    CHECK(best_response_power(1000.0, up) == up.p_max_w);
}

TEST_CASE("best response dominates random powers in the box") {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        UavGameParams up = game_checks::random_uav_params(rng);
        const double r = rng.uniform(0.0, 20.0);
        const double star = uav_utility(best_response_power(r, up), r, up);
        for (int i = 0; i < 1000; ++i) {
            const double p = rng.uniform(up.p_min_w, up.p_max_w);
            CHECK(star >= uav_utility(p, r, up) - 1e-12);
        }
    }
}

TEST_CASE("alice utility term-by-term values") {
    UavGameParams up = table_uav(1.0);
    up.willie_gain = 1.0;
    AliceParams ap = table_alice();
    ap.psi = 1.0;
    ap.noise_gain = 1.0;

    // zero power leaves only the baseline false-alarm-side detection term
    CHECK(alice_utility(0.0, 5.0, up, ap) ==
          Approx(-ap.mu * ap.omega * q_function(0.6 / 0.1)).margin(1e-15));

    // mu=psi=omega=g=N0=1, eps=0.6, sigma=0.1, r=1, P=1:
    // log2(2) - Q(-4) - ln 2
    CHECK(alice_utility(1.0, 1.0, up, ap) == Approx(-0.69311550931811219).epsilon(1e-12));

    // throughput-only reduction grows with power
    ap.omega = 0.0;
    double prev = alice_utility(0.0, 0.0, up, ap);
    for (double p = 0.1; p <= 2.0; p += 0.1) {
        const double v = alice_utility(p, 0.0, up, ap);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("optimal reward matches a dense grid search") {
    Rng rng(47);
    for (int trial = 0; trial < 25; ++trial) {
        const UavGameParams up = game_checks::random_uav_params(rng);
        const AliceParams ap = game_checks::random_alice_params(rng);
        const double tol = 1e-7;
        const double r_star = optimal_reward(up, ap, tol);
        const double lo = leader_bracket_low(up, ap);
        const auto objective = [&](double r) {
            return alice_utility(best_response_power(r, up), r, up, ap);
        };
        const double grid_best = oracles::grid_max(objective, lo, ap.r_max, 10000);
        CHECK(objective(r_star) >= grid_best - 1e-9);
    }
}

TEST_CASE("interior optimum is bracket independent") {
    const UavGameParams up = table_uav(1.0);
    AliceParams ap = table_alice();
    const double tol = 1e-8;
    const double r_star = optimal_reward(up, ap, tol);
    REQUIRE(r_star > ap.r_min + 0.5);
    REQUIRE(r_star < ap.r_max - 0.5);
    AliceParams wide = ap;
    wide.r_max = ap.r_max * 2.0;
    CHECK(std::abs(optimal_reward(up, wide, tol) - r_star) <= 10.0 * tol);
}

TEST_CASE("degenerate detection weight still solves against the grid") {
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const UavGameParams up = game_checks::random_uav_params(rng);
        AliceParams ap = game_checks::random_alice_params(rng);
        ap.omega = 0.0;
        const double r_star = optimal_reward(up, ap, 1e-7);
        const auto objective = [&](double r) {
            return alice_utility(best_response_power(r, up), r, up, ap);
        };
        const double lo = leader_bracket_low(up, ap);
        CHECK(objective(r_star) >= oracles::grid_max(objective, lo, ap.r_max, 10000) - 1e-9);
    }
}

TEST_CASE("optimal reward reports an empty concavity interval") {
    UavGameParams up = table_uav(50.0);  // phi so high the concavity bound exceeds r_max
    const AliceParams ap = table_alice();
    CHECK_THROWS_AS(optimal_reward(up, ap, 1e-6), config_error);
    CHECK_THROWS_WITH(optimal_reward(up, ap, 1e-6),
                      Catch::Matchers::ContainsSubstring("concavity"));
}

TEST_CASE("leader solver attains the dense-grid global maximum") {
    // The composed objective is not unimodal in general: the detection
    // sigmoid is convex past the detector midpoint and can leave a second
    // local maximum at the interval's left edge. The scan-plus-golden solver
    // must still come out at least as high as any of 10000 grid points.
    Rng rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        const UavGameParams up = game_checks::random_uav_params(rng);
        const AliceParams ap = game_checks::random_alice_params(rng);
        const double tol = 1e-6;
        const double r_star = optimal_reward(up, ap, tol);
        const double lo = leader_bracket_low(up, ap);
        const auto objective = [&](double r) {
            return alice_utility(best_response_power(r, up), r, up, ap);
        };
        CHECK(objective(r_star) >= oracles::grid_max(objective, lo, ap.r_max, 10000) - 1e-9);
    }
}

TEST_CASE("stackelberg solve returns a deviation-proof equilibrium") {
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const UavGameParams up = game_checks::random_uav_params(rng);
        const AliceParams ap = game_checks::random_alice_params(rng);
        const GameEquilibrium eq = solve_stackelberg({up}, ap, 1e-6, ap.r_min);
        REQUIRE(eq.powers_w.size() == 1);
        CHECK(eq.powers_w[0] >= up.p_min_w);
        CHECK(eq.powers_w[0] <= up.p_max_w);
        CHECK(eq.detect_probs[0] >= 0.0);
        CHECK(eq.detect_probs[0] <= 1.0);
        CHECK(game_checks::deviation_proof(up, ap, eq.powers_w[0], eq.reward_rates[0], 1e-6));
    }
}

TEST_CASE("random restarts land on the same equilibrium rate") {
    Rng rng(67);
    const UavGameParams up = game_checks::random_uav_params(rng);
    const AliceParams ap = game_checks::random_alice_params(rng);
    const double zeta = 1e-6;
    const double reference = solve_stackelberg({up}, ap, zeta, ap.r_min).reward_rates[0];
    for (int i = 0; i < 20; ++i) {
        const double r0 = rng.uniform(ap.r_min, ap.r_max);
        const double got = solve_stackelberg({up}, ap, zeta, r0).reward_rates[0];
        CHECK(std::abs(got - reference) <= 10.0 * zeta);
    }
}

TEST_CASE("stackelberg solve validates its inputs") {
    const AliceParams ap = table_alice();
    CHECK_THROWS_AS(solve_stackelberg({}, ap, 1e-6, 1.0), validation_error);
    CHECK_THROWS_AS(solve_stackelberg({table_uav()}, ap, -1.0, 1.0), validation_error);
    CHECK_THROWS_AS(solve_stackelberg({table_uav()}, ap, 1e-6, ap.r_max + 1.0), validation_error);
}

TEST_CASE("identical UAVs fill the combination up to the budget knee") {
    AliceParams ap = table_alice();
    const UavGameParams up = table_uav(1.0);  // per-UAV leader utility is positive here
    const GameEquilibrium solo = solve_stackelberg({up}, ap, 1e-6, ap.r_min);
    const double per_value = solo.alice_utilities[0];
    const double per_payment = alice_payment(solo.powers_w[0], solo.reward_rates[0]);
    REQUIRE(per_value > 0.0);

    std::vector<UavGameParams> fleet(6, up);
    for (int k = 1; k <= 6; ++k) {
        ap.budget = per_payment * k + 1e-9;  // admits exactly k members
        const GameEquilibrium eq = select_combination(fleet, ap, 1e-6, 6);
        CHECK(static_cast<int>(eq.combination.size()) == k);
        CHECK(eq.combination_value == Approx(per_value * k).epsilon(1e-9));
    }
}

TEST_CASE("unbounded budget reduces to the unconstrained subset argmax") {
    Rng rng(71);
    std::vector<UavGameParams> fleet;
    for (int j = 0; j < 5; ++j) fleet.push_back(game_checks::random_uav_params(rng));
    AliceParams ap = game_checks::random_alice_params(rng);
    ap.budget = 1e18;
    const GameEquilibrium eq = select_combination(fleet, ap, 1e-6, 5);

    // brute-force enumeration oracle over all subsets
    const GameEquilibrium full = solve_stackelberg(fleet, ap, 1e-6, ap.r_min);
    double best = -1e300;
    std::vector<int> best_set;
    for (unsigned mask = 1; mask < 32; ++mask) {
        double v = 0.0;
        std::vector<int> members;
        for (int j = 0; j < 5; ++j)
            if (mask & (1u << j)) {
                v += full.alice_utilities[static_cast<std::size_t>(j)];
                members.push_back(j);
            }
        if (v > best) {
            best = v;
            best_set = members;
        }
    }
    CHECK(eq.combination == best_set);
    CHECK(eq.combination_value == Approx(best).epsilon(1e-9));
}

TEST_CASE("combination selection is invariant under UAV relabeling") {
    Rng rng(73);
    std::vector<UavGameParams> fleet;
    for (int j = 0; j < 6; ++j) fleet.push_back(game_checks::random_uav_params(rng));
    const AliceParams ap = game_checks::random_alice_params(rng);
    const GameEquilibrium eq = select_combination(fleet, ap, 1e-6, 6);

    // rotate labels by two
    std::vector<UavGameParams> rotated;
    for (int j = 0; j < 6; ++j) rotated.push_back(fleet[static_cast<std::size_t>((j + 2) % 6)]);
    const GameEquilibrium eq_rot = select_combination(rotated, ap, 1e-6, 6);

    std::vector<int> expected;
    for (int j : eq.combination) expected.push_back((j - 2 + 6) % 6);
    std::sort(expected.begin(), expected.end());
    CHECK(eq_rot.combination == expected);
    CHECK(eq_rot.combination_value == Approx(eq.combination_value).epsilon(1e-9));
}

TEST_CASE("no feasible subset raises an infeasibility error") {
    AliceParams ap = table_alice();
    ap.budget = 1e-9;  // cheaper than any payment
    CHECK_THROWS_AS(select_combination({table_uav(1.0), table_uav(2.0)}, ap, 1e-6, 2),
                    infeasible_error);
}

TEST_CASE("combination selection rejects oversized inputs") {
    const AliceParams ap = table_alice();
    std::vector<UavGameParams> fleet(13, table_uav());
    CHECK_THROWS_AS(select_combination(fleet, ap, 1e-6, 13), validation_error);
    CHECK_THROWS_AS(select_combination({table_uav()}, ap, 1e-6, 0), validation_error);
}
