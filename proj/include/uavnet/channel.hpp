#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "uavnet/errors.hpp"

namespace uavnet {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

// Probabilistic air-to-ground channel. LoS probability follows the logistic
// elevation-angle model
//   p_los = 1 / (1 + a * exp(-b * (theta_deg - a)))
// and the mean path loss mixes LoS/NLoS free-space-plus-excess losses by that
// probability.
struct ChannelParams {
    double sshape_a = 9.61;            // logistic offset and scale (shared constant)
    double sshape_b = 0.16;
    double carrier_hz = 2.4e9;
    double excess_loss_los_db = 1.0;
    double excess_loss_nlos_db = 20.0;
    double min_rx_power_dbm = -90.0;   // coverage threshold at the ground user

    void validate() const {
        if (!(sshape_a > 0.0) || !(sshape_b > 0.0) || !(carrier_hz > 0.0))
            throw validation_error("ChannelParams: sshape_a, sshape_b, carrier_hz must be > 0");
        if (!(excess_loss_los_db >= 0.0) || !(excess_loss_nlos_db >= excess_loss_los_db))
            throw validation_error("ChannelParams: need excess_loss_nlos_db >= excess_loss_los_db >= 0");
        if (!std::isfinite(min_rx_power_dbm))
            throw validation_error("ChannelParams: min_rx_power_dbm must be finite");
    }
};

// Ground-user and UAV positions for one problem instance. Coordinates in
// meters; UAVs carry an altitude.
struct Placement {
    std::vector<std::array<double, 2>> gu_xy;
    std::vector<std::array<double, 3>> uav_xyz;  // (x, y, h)
    double area_bound_m = 3000.0;

    std::size_t n_gus() const { return gu_xy.size(); }
    std::size_t n_uavs() const { return uav_xyz.size(); }

    // horizontal GU-UAV distance
    double horizontal_distance(std::size_t gu, std::size_t uav) const {
        const double dx = gu_xy[gu][0] - uav_xyz[uav][0];
        const double dy = gu_xy[gu][1] - uav_xyz[uav][1];
        return std::hypot(dx, dy);
    }

    void validate() const {
        if (gu_xy.empty() || uav_xyz.empty())
            throw validation_error("Placement: need at least one GU and one UAV");
        if (!(area_bound_m > 0.0)) throw validation_error("Placement: area_bound_m must be > 0");
        for (const auto& g : gu_xy)
            for (double c : g)
                if (!(c >= 0.0) || !(c <= area_bound_m))
                    throw validation_error("Placement: GU coordinate outside [0, area_bound_m]");
        for (const auto& u : uav_xyz) {
            if (!(u[0] >= 0.0) || !(u[0] <= area_bound_m) || !(u[1] >= 0.0) || !(u[1] <= area_bound_m))
                throw validation_error("Placement: UAV coordinate outside [0, area_bound_m]");
            if (!(u[2] > 0.0)) throw validation_error("Placement: UAV altitude must be > 0");
        }
    }
};

// LoS probability at altitude h and horizontal distance s. At s = 0 the
// elevation angle is the 90-degree limit.
inline double los_probability(double h, double s, const ChannelParams& cp) {
    if (!std::isfinite(h) || !std::isfinite(s))
        throw validation_error("los_probability: non-finite input");
    if (!(h > 0.0) || !(s >= 0.0))
        throw validation_error("los_probability: requires h > 0 and s >= 0");
    const double theta_deg = (180.0 / std::numbers::pi) * std::atan2(h, s);
    return 1.0 / (1.0 + cp.sshape_a * std::exp(-cp.sshape_b * (theta_deg - cp.sshape_a)));
}

inline double free_space_loss_db(double carrier_hz, double distance_m) {
    return 20.0 * std::log10(4.0 * std::numbers::pi * carrier_hz * distance_m / kSpeedOfLight);
}

// Probability-weighted mean path loss in dB:
//   L = p_los * (FSPL + eps_los) + (1 - p_los) * (FSPL + eps_nlos)
inline double mean_path_loss(double h, double s, const ChannelParams& cp) {
    const double d = std::hypot(h, s);
    if (!std::isfinite(d) || d <= 0.0)
        throw validation_error("mean_path_loss: slant distance must be positive and finite");
    const double p_los = los_probability(h, s, cp);
    return free_space_loss_db(cp.carrier_hz, d) + p_los * cp.excess_loss_los_db +
           (1.0 - p_los) * cp.excess_loss_nlos_db;
}

inline double received_power_dbm(double p_tx_dbm, double h, double s, const ChannelParams& cp) {
    if (!std::isfinite(p_tx_dbm)) throw validation_error("received_power_dbm: non-finite transmit power");
    return p_tx_dbm - mean_path_loss(h, s, cp);
}

// Ground radius where the mean path loss reaches the threshold implied by
// transmit power and the minimum received power. Solved by bisection to
// 0.1 m after a coarse monotonicity probe; returns 0 when the threshold is
// already exceeded straight down.
inline double coverage_radius(double h, const ChannelParams& cp, double p_tx_dbm,
                              double search_bound_m = 30'000.0) {
    if (!std::isfinite(h) || !(h > 0.0)) throw validation_error("coverage_radius: requires finite h > 0");
    if (!(search_bound_m > 0.0)) throw validation_error("coverage_radius: search bound must be > 0");
    const double loss_threshold_db = p_tx_dbm - cp.min_rx_power_dbm;

    constexpr int kProbePoints = 32;
    double prev = mean_path_loss(h, 0.0, cp);
    if (prev > loss_threshold_db) return 0.0;
    for (int i = 1; i < kProbePoints; ++i) {
        const double s = search_bound_m * static_cast<double>(i) / (kProbePoints - 1);
        const double cur = mean_path_loss(h, s, cp);
        if (cur < prev - 1e-9)
            throw numerical_error("coverage_radius: path loss not monotone in ground distance near s=" +
                                  std::to_string(s) + " m; check excess-loss ordering");
        prev = cur;
    }
    if (prev < loss_threshold_db)
        throw numerical_error("coverage_radius: loss threshold " + std::to_string(loss_threshold_db) +
                              " dB unreachable within search bound " + std::to_string(search_bound_m) + " m");

    double lo = 0.0, hi = search_bound_m;
    constexpr double kTolM = 0.1;
    for (int it = 0; it < 200 && (hi - lo) > kTolM; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_path_loss(h, mid, cp) <= loss_threshold_db ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace uavnet
