#pragma once

#include <cstdint>
#include <vector>

#include "uavnet/channel.hpp"
#include "uavnet/covert_game.hpp"
#include "uavnet/errors.hpp"
#include "uavnet/rng.hpp"
#include "uavnet/units.hpp"

namespace uavnet {

// One problem instance: placements, channel environment, per-UAV game
// parameters, and the leader's constants.
struct Scenario {
    Placement placement;
    ChannelParams channel;
    std::vector<UavGameParams> uav_game;
    AliceParams alice;
    std::vector<double> gu_gain_db;        // per-GU gain from the parameter table; no equation consumes it
    std::uint64_t seed = 0;
    std::vector<double> node_coverage_frac;  // per-UAV GU fraction covered at p_max; static policy feature

    int n_uavs() const { return static_cast<int>(placement.n_uavs()); }
    int n_gus() const { return static_cast<int>(placement.n_gus()); }

    void validate() const {
        placement.validate();
        channel.validate();
        alice.validate();
        if (uav_game.size() != placement.n_uavs())
            throw validation_error("Scenario: uav_game size must match UAV count");
        for (const auto& up : uav_game) up.validate();
        if (gu_gain_db.size() != placement.n_gus())
            throw validation_error("Scenario: gu_gain_db size must match GU count");
        if (node_coverage_frac.size() != placement.n_uavs())
            throw validation_error("Scenario: node_coverage_frac size must match UAV count");
    }
};

// Parameter-table defaults and randomization ranges for scenario draws.
struct ScenarioTemplate {
    double area_m = 3000.0;
    ChannelParams channel{};           // urban defaults, 2.4 GHz
    double alt_min_m = 100.0;
    double alt_max_m = 300.0;
    double ptx_min_dbm = 10.0;
    double ptx_max_dbm = 30.0;
    double willie_gain_db = 1.0;
    double power_cost_min = 1.0;       // per-UAV phi drawn uniformly from this range
    double power_cost_max = 5.0;
    double gu_gain_min_db = 3.0;
    double gu_gain_max_db = 10.0;
    AliceParams alice{};

    void validate() const {
        channel.validate();
        alice.validate();
        if (!(area_m > 0.0)) throw validation_error("ScenarioTemplate: area_m must be > 0");
        if (!(alt_min_m > 0.0) || !(alt_min_m <= alt_max_m))
            throw validation_error("ScenarioTemplate: need 0 < alt_min_m <= alt_max_m");
        if (!(ptx_min_dbm < ptx_max_dbm))
            throw validation_error("ScenarioTemplate: need ptx_min_dbm < ptx_max_dbm");
        if (!(power_cost_min > 0.0) || !(power_cost_min <= power_cost_max))
            throw validation_error("ScenarioTemplate: need 0 < power_cost_min <= power_cost_max");
        if (!(gu_gain_min_db <= gu_gain_max_db))
            throw validation_error("ScenarioTemplate: need gu_gain_min_db <= gu_gain_max_db");
    }
};

// Deterministic scenario draw. Draw order is fixed (GU positions, UAV
// positions and altitudes, GU gains, power-cost coefficients) so a seed pins
// the instance bit-for-bit.
inline Scenario generate_scenario(const ScenarioTemplate& tmpl, std::uint64_t seed, int n_uavs, int n_gus) {
    tmpl.validate();
    if (n_uavs < 1 || n_gus < 1)
        throw validation_error("generate_scenario: need at least one UAV and one GU");

    Rng rng(derive_seed(seed, 0x5ce7a21bULL));
    Scenario sc;
    sc.seed = seed;
    sc.channel = tmpl.channel;
    sc.alice = tmpl.alice;
    sc.placement.area_bound_m = tmpl.area_m;

    sc.placement.gu_xy.resize(static_cast<std::size_t>(n_gus));
    for (auto& g : sc.placement.gu_xy) {
        g[0] = rng.uniform(0.0, tmpl.area_m);
        g[1] = rng.uniform(0.0, tmpl.area_m);
    }
    sc.placement.uav_xyz.resize(static_cast<std::size_t>(n_uavs));
    for (auto& u : sc.placement.uav_xyz) {
        u[0] = rng.uniform(0.0, tmpl.area_m);
        u[1] = rng.uniform(0.0, tmpl.area_m);
        u[2] = rng.uniform(tmpl.alt_min_m, tmpl.alt_max_m);
    }

    sc.gu_gain_db.resize(static_cast<std::size_t>(n_gus));
    for (auto& g : sc.gu_gain_db) g = rng.uniform(tmpl.gu_gain_min_db, tmpl.gu_gain_max_db);

    sc.uav_game.resize(static_cast<std::size_t>(n_uavs));
    for (auto& up : sc.uav_game) {
        up.power_cost_coeff = rng.uniform(tmpl.power_cost_min, tmpl.power_cost_max);
        up.willie_gain = db_to_linear(tmpl.willie_gain_db);
        up.p_min_w = dbm_to_watts(tmpl.ptx_min_dbm);
        up.p_max_w = dbm_to_watts(tmpl.ptx_max_dbm);
    }

    sc.node_coverage_frac.resize(static_cast<std::size_t>(n_uavs));
    for (int j = 0; j < n_uavs; ++j) {
        int covered = 0;
        for (int i = 0; i < n_gus; ++i) {
            const double s = sc.placement.horizontal_distance(static_cast<std::size_t>(i),
                                                              static_cast<std::size_t>(j));
            const double rx = received_power_dbm(tmpl.ptx_max_dbm, sc.placement.uav_xyz[static_cast<std::size_t>(j)][2],
                                                 s, sc.channel);
            if (rx >= sc.channel.min_rx_power_dbm) ++covered;
        }
        sc.node_coverage_frac[static_cast<std::size_t>(j)] = static_cast<double>(covered) / n_gus;
    }

    sc.validate();
    return sc;
}

inline Scenario generate_scenario(std::uint64_t seed, int n_uavs = 9, int n_gus = 20,
                                  double area_m = 3000.0) {
    ScenarioTemplate tmpl;
    tmpl.area_m = area_m;
    return generate_scenario(tmpl, seed, n_uavs, n_gus);
}

}  // namespace uavnet
