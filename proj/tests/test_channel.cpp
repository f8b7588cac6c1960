#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "uavnet/channel.hpp"
#include "uavnet/rng.hpp"
#include "uavnet/units.hpp"

using namespace uavnet;
using Catch::Approx;

namespace {

ChannelParams urban24() {
    return ChannelParams{9.61, 0.16, 2.4e9, 1.0, 20.0, -90.0};
}

// analytic free-space inversion for zero excess losses
double free_space_radius(double h, double carrier_hz, double loss_threshold_db) {
    const double d = kSpeedOfLight * std::pow(10.0, loss_threshold_db / 20.0) /
                     (4.0 * std::numbers::pi * carrier_hz);
    return std::sqrt(std::max(0.0, d * d - h * h));
}

}  // namespace

TEST_CASE("los probability matches direct scalar evaluation") {
    const ChannelParams cp = urban24();
    // theta = 90 deg at s = 0
    CHECK(los_probability(100.0, 0.0, cp) == Approx(0.99997507453790302).epsilon(1e-12));

    // random inputs against the formula written out longhand
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double h = rng.uniform(1.0, 500.0);
        const double s = rng.uniform(0.0, 5000.0);
        const double theta = (180.0 / std::numbers::pi) * std::atan(h / std::max(s, 1e-300));
        const double expected = 1.0 / (1.0 + 9.61 * std::exp(-0.16 * (theta - 9.61)));
        CHECK(los_probability(h, s, cp) == Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("los probability elevation-angle limits") {
    const ChannelParams cp = urban24();
    // h >> s: approaches the 90-degree value
    CHECK(los_probability(1e12, 1.0, cp) == Approx(0.99997507453790302).epsilon(1e-9));
    // s >> h: approaches 1 / (1 + a e^{ab})
    CHECK(los_probability(100.0, 1e12, cp) == Approx(0.021872621233283408).epsilon(1e-9));
}

TEST_CASE("los probability is a probability and increases with altitude") {
    const ChannelParams cp = urban24();
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double s = rng.uniform(1.0, 4000.0);
        double prev = 0.0;
        for (double h = 10.0; h <= 2000.0; h += 50.0) {
            const double p = los_probability(h, s, cp);
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            CHECK(p > prev);
            prev = p;
        }
    }
}

TEST_CASE("los probability rejects bad input") {
    const ChannelParams cp = urban24();
    CHECK_THROWS_AS(los_probability(std::nan(""), 10.0, cp), validation_error);
    CHECK_THROWS_AS(los_probability(100.0, std::nan(""), cp), validation_error);
    CHECK_THROWS_AS(los_probability(0.0, 10.0, cp), validation_error);
    CHECK_THROWS_AS(los_probability(-5.0, 10.0, cp), validation_error);
    CHECK_THROWS_AS(los_probability(100.0, -1.0, cp), validation_error);
}

TEST_CASE("mean path loss reduces to free space when excess terms vanish") {
    ChannelParams cp = urban24();
    cp.excess_loss_los_db = 0.0;
    cp.excess_loss_nlos_db = 0.0;
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const double h = rng.uniform(1.0, 400.0);
        const double s = rng.uniform(0.0, 4000.0);
        const double d = std::hypot(h, s);
        CHECK(mean_path_loss(h, s, cp) == Approx(free_space_loss_db(2.4e9, d)).epsilon(1e-12));
    }
}

TEST_CASE("mean path loss frozen example at 1 km") {
    // 2.4 GHz, d = 1000 m: free-space term 100.052008... dB; with
    // eps_los = 1, eps_nlos = 20 and LoS probability 0.9 the mix adds 2.9 dB.
    CHECK(free_space_loss_db(2.4e9, 1000.0) == Approx(100.05200805611549).epsilon(1e-12));
    CHECK(100.05200805611549 + 0.9 * 1.0 + 0.1 * 20.0 == Approx(102.95200805611549).epsilon(1e-15));

    // same identity through the API: mix weight comes from the geometry
    const ChannelParams cp = urban24();
    const double h = 600.0, s = 800.0;  // d = 1000
    const double p = los_probability(h, s, cp);
    CHECK(mean_path_loss(h, s, cp) ==
          Approx(100.05200805611549 + p * 1.0 + (1.0 - p) * 20.0).epsilon(1e-12));
}

TEST_CASE("mean path loss is monotone in ground distance") {
    const ChannelParams cp = urban24();
    for (double h : {50.0, 150.0, 300.0}) {
        double prev = mean_path_loss(h, 0.0, cp);
        for (double s = 10.0; s <= 20000.0; s += 10.0) {
            const double cur = mean_path_loss(h, s, cp);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("mean path loss stays within the excess-loss envelope") {
    const ChannelParams cp = urban24();
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const double h = rng.uniform(1.0, 500.0);
        const double s = rng.uniform(0.0, 6000.0);
        const double fspl = free_space_loss_db(cp.carrier_hz, std::hypot(h, s));
        const double loss = mean_path_loss(h, s, cp);
        CHECK(loss >= fspl + cp.excess_loss_los_db - 1e-12);
        CHECK(loss <= fspl + cp.excess_loss_nlos_db + 1e-12);
    }
}

TEST_CASE("received power subtracts the loss and is linear in transmit power") {
    const ChannelParams cp = urban24();
    Rng rng(19);
    for (int i = 0; i < 200; ++i) {
        const double h = rng.uniform(10.0, 300.0);
        const double s = rng.uniform(0.0, 3000.0);
        const double p = rng.uniform(0.0, 40.0);
        const double q = rng.uniform(0.0, 40.0);
        CHECK(received_power_dbm(p, h, s, cp) - received_power_dbm(q, h, s, cp) ==
              Approx(p - q).margin(1e-12));
        // coverage threshold is a pure loss condition
        const bool covered = received_power_dbm(p, h, s, cp) >= cp.min_rx_power_dbm;
        CHECK(covered == (mean_path_loss(h, s, cp) <= p - cp.min_rx_power_dbm));
    }
}

TEST_CASE("coverage radius agrees with the analytic free-space inversion") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        ChannelParams cp = urban24();
        cp.excess_loss_los_db = 0.0;
        cp.excess_loss_nlos_db = 0.0;
        cp.carrier_hz = rng.uniform(0.5e9, 6e9);
        const double h = rng.uniform(50.0, 400.0);
        const double p_tx = rng.uniform(5.0, 30.0);
        const double expected = free_space_radius(h, cp.carrier_hz, p_tx - cp.min_rx_power_dbm);
        const double got = coverage_radius(h, cp, p_tx, 1e6);
        CHECK(std::abs(got - expected) <= 0.1);
    }
}

TEST_CASE("coverage radius is zero when altitude exhausts the budget") {
    ChannelParams cp = urban24();
    cp.excess_loss_los_db = 0.0;
    cp.excess_loss_nlos_db = 0.0;
    const double p_tx = 10.0;
    const double d_max = kSpeedOfLight * std::pow(10.0, (p_tx + 90.0) / 20.0) /
                         (4.0 * std::numbers::pi * cp.carrier_hz);
    CHECK(coverage_radius(d_max * 1.01, cp, p_tx) == 0.0);
}

TEST_CASE("coverage radius grows with transmit power") {
    const ChannelParams cp = urban24();
    double prev = coverage_radius(200.0, cp, 5.0);
    for (double p_tx = 6.0; p_tx <= 30.0; p_tx += 1.0) {
        const double r = coverage_radius(200.0, cp, p_tx);
        CHECK(r >= prev - 0.2);  // bisection tolerance
        prev = r;
    }
}

TEST_CASE("coverage radius reports an unreachable threshold") {
    const ChannelParams cp = urban24();
    // enormous budget, tiny search bound
    CHECK_THROWS_AS(coverage_radius(100.0, cp, 200.0, 500.0), numerical_error);
}

TEST_CASE("coverage radius detects non-monotone parameterizations") {
    // inverted excess ordering: loss first rises with distance, then falls as
    // the LoS mix decays, so the probe must reject before bisection
    ChannelParams cp = urban24();
    cp.excess_loss_los_db = 30.0;
    cp.excess_loss_nlos_db = 0.0;
    CHECK_THROWS_AS(coverage_radius(100.0, cp, 30.0), numerical_error);
}

TEST_CASE("unit conversions round-trip") {
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        const double db = rng.uniform(-120.0, 60.0);
        CHECK(linear_to_db(db_to_linear(db)) == Approx(db).margin(1e-9));
        CHECK(watts_to_dbm(dbm_to_watts(db)) == Approx(db).margin(1e-9));
    }
    CHECK(dbm_to_watts(30.0) == Approx(1.0).epsilon(1e-12));
    CHECK(dbm_to_watts(10.0) == Approx(0.01).epsilon(1e-12));
    CHECK(db_to_linear(1.0) == Approx(1.2589254117941673).epsilon(1e-12));
}
