#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "uavnet/errors.hpp"

namespace uavnet {

// Leader-follower incentive game for covert relaying. Alice (the sender)
// posts a per-UAV reward rate r; each UAV responds with a transmit power.
// The warden runs an energy detector with threshold eps, so higher power
// buys throughput at the price of detection probability.

struct UavGameParams {
    double power_cost_coeff = 1.0;  // utility lost per transmitted watt
    double willie_gain = 1.0;       // linear power gain toward the warden
    double p_min_w = 0.01;
    double p_max_w = 1.0;

    void validate() const {
        if (!(power_cost_coeff > 0.0)) throw validation_error("UavGameParams: power_cost_coeff must be > 0");
        if (!(willie_gain > 0.0)) throw validation_error("UavGameParams: willie_gain must be > 0");
        if (!(p_min_w > 0.0) || !(p_min_w < p_max_w))
            throw validation_error("UavGameParams: need 0 < p_min_w < p_max_w");
    }
};

struct AliceParams {
    double mu = 1.0;
    double psi = 5.0;              // throughput weight
    double omega = 1.0;            // detection-risk weight
    double noise_gain = 1.0;       // linear environmental-noise gain in the SNR term
    double detect_threshold = 0.6; // warden's energy-detector threshold
    double noise_sigma = 0.1;      // warden's noise power, watts
    double r_min = 0.1;
    double r_max = 20.0;
    double budget = 50.0;          // cap on Alice's total payment

    void validate() const {
        if (!(mu > 0.0) || !(psi > 0.0) || !(omega >= 0.0))
            throw validation_error("AliceParams: mu, psi must be > 0 and omega >= 0");
        if (!(noise_gain > 0.0) || !(noise_sigma > 0.0))
            throw validation_error("AliceParams: noise_gain and noise_sigma must be > 0");
        if (!(r_min > 0.0) || !(r_min < r_max))
            throw validation_error("AliceParams: need 0 < r_min < r_max");
        if (!(budget > 0.0)) throw validation_error("AliceParams: budget must be > 0");
    }
};

struct GameEquilibrium {
    std::vector<double> powers_w;
    std::vector<double> reward_rates;   // per-UAV optimal rate
    double reward_rate = 0.0;           // mean rate over the selected combination
    std::vector<double> uav_utilities;
    std::vector<double> alice_utilities;
    std::vector<double> detect_probs;
    std::vector<int> combination;       // selected UAV indices, ascending
    double combination_value = 0.0;
};

// Standard normal upper tail via the complementary error function.
inline double q_function(double x) {
    if (!std::isfinite(x)) throw validation_error("q_function: non-finite input");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// P(warden decides "transmitting" | transmitting) for an energy detector:
// Q((eps - P * g^2) / sigma). Strictly increasing in P.
inline double detection_probability(double p_tx_w, const UavGameParams& up, const AliceParams& ap) {
    if (!(p_tx_w >= 0.0)) throw validation_error("detection_probability: power must be >= 0");
    const double z = ap.detect_threshold - p_tx_w * up.willie_gain * up.willie_gain;
    return q_function(z / ap.noise_sigma);
}

// U = r * ln(1 + P) - phi * P
inline double uav_utility(double p_tx_w, double r, const UavGameParams& up) {
    if (!(p_tx_w >= 0.0) || !(r >= 0.0)) throw validation_error("uav_utility: power and rate must be >= 0");
    return r * std::log1p(p_tx_w) - up.power_cost_coeff * p_tx_w;
}

// Follower's closed-form best response: the interior stationary point
// r/phi - 1 clamped to the power box. U is strictly concave in P, so the
// clamp is exact.
inline double best_response_power(double r, const UavGameParams& up) {
    if (!(r >= 0.0)) throw validation_error("best_response_power: rate must be >= 0");
    return std::clamp(r / up.power_cost_coeff - 1.0, up.p_min_w, up.p_max_w);
}

// Alice's payment to one UAV at (power, rate).
inline double alice_payment(double p_tx_w, double r) { return r * std::log1p(p_tx_w); }

// V = mu * (psi * log2(1 + P g / N0) - omega * p_detect - r * ln(1 + P))
inline double alice_utility(double p_tx_w, double r, const UavGameParams& up, const AliceParams& ap) {
    if (!(p_tx_w >= 0.0)) throw validation_error("alice_utility: power must be >= 0");
    const double throughput = std::log2(1.0 + p_tx_w * up.willie_gain / ap.noise_gain);
    return ap.mu * (ap.psi * throughput - ap.omega * detection_probability(p_tx_w, up, ap) -
                    alice_payment(p_tx_w, r));
}

namespace detail {

// Derivative-free global 1D maximization: a coarse scan brackets the best
// cell, golden-section refines it, and the best point actually evaluated is
// returned (so boundary optima are hit exactly). The scan matters: the
// leader objective is not unimodal everywhere, because the detection-term
// sigmoid turns convex past the detector midpoint and can carve a dip after
// the interval's left edge.
template <class F>
double scan_golden_max(F&& f, double lo, double hi, double tol, int scan_cells = 256) {
    if (hi - lo <= tol) return lo;
    double best_x = lo, best_f = f(lo);
    const auto consider = [&](double x, double fx) {
        if (fx > best_f) {
            best_f = fx;
            best_x = x;
        }
    };
    int best_i = 0;
    for (int i = 1; i <= scan_cells; ++i) {
        const double x = lo + (hi - lo) * i / scan_cells;
        const double fx = f(x);
        if (fx > best_f) best_i = i;
        consider(x, fx);
    }

    constexpr double kInvPhi = 0.6180339887498949;   // (sqrt(5)-1)/2
    constexpr double kInvPhi2 = 0.3819660112501051;  // 1 - kInvPhi
    double a = lo + (hi - lo) * std::max(0, best_i - 1) / scan_cells;
    double b = lo + (hi - lo) * std::min(scan_cells, best_i + 1) / scan_cells;
    double c = a + kInvPhi2 * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    for (int it = 0; it < 400 && (b - a) > tol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = a + kInvPhi2 * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best_x;
}

}  // namespace detail

// Interval on which the leader objective r -> V(best_response(r), r) is
// concave: detection must sit at or past the detector's balance point,
// i.e. r >= phi * (eps / g^2 + 1).
inline double leader_bracket_low(const UavGameParams& up, const AliceParams& ap) {
    const double concave_from =
        up.power_cost_coeff * (ap.detect_threshold / (up.willie_gain * up.willie_gain) + 1.0);
    return std::max(ap.r_min, concave_from);
}

// Leader's optimal rate over the concavity interval: scan-bracketed
// golden-section on the composed objective r -> V(best_response(r), r).
// The objective's only non-concave structure sits inside the detector's
// transition window just past the interval's left edge (width ~ 8 sigma phi
// / g^2 in rate units, where the detection sigmoid still moves), so that
// window gets a dedicated fine pass on top of the coarse global one.
inline double optimal_reward(const UavGameParams& up, const AliceParams& ap, double tol) {
    if (!(tol > 0.0)) throw validation_error("optimal_reward: tolerance must be > 0");
    const double lo = leader_bracket_low(up, ap);
    const double hi = ap.r_max;
    if (lo > hi)
        throw config_error(
            "optimal_reward: empty search interval; concavity condition r >= phi*(eps/g^2 + 1) = " +
            std::to_string(lo) + " exceeds r_max = " + std::to_string(hi));
    const auto objective = [&](double r) { return alice_utility(best_response_power(r, up), r, up, ap); };
    const double window =
        8.0 * ap.noise_sigma * up.power_cost_coeff / (up.willie_gain * up.willie_gain);
    const double r_window = detail::scan_golden_max(objective, lo, std::min(hi, lo + window), tol, 128);
    const double r_global = detail::scan_golden_max(objective, lo, hi, tol, 256);
    return objective(r_window) >= objective(r_global) ? r_window : r_global;
}

// Per-UAV fixed point of (best response, optimal rate), iterated from r0
// until successive rate iterates differ by less than zeta. The composed map
// does not depend on the incoming iterate, so convergence takes at most two
// rounds; the cap guards misconfiguration.
inline GameEquilibrium solve_stackelberg(const std::vector<UavGameParams>& ups, const AliceParams& ap,
                                         double zeta, double r0) {
    if (ups.empty()) throw validation_error("solve_stackelberg: need at least one UAV");
    if (!(zeta > 0.0)) throw validation_error("solve_stackelberg: zeta must be > 0");
    if (!(r0 >= ap.r_min) || !(r0 <= ap.r_max))
        throw validation_error("solve_stackelberg: r0 outside [r_min, r_max]");
    ap.validate();

    GameEquilibrium eq;
    const std::size_t n = ups.size();
    eq.powers_w.resize(n);
    eq.reward_rates.resize(n);
    eq.uav_utilities.resize(n);
    eq.alice_utilities.resize(n);
    eq.detect_probs.resize(n);
    eq.combination.resize(n);

    constexpr int kMaxIters = 100;
    for (std::size_t j = 0; j < n; ++j) {
        ups[j].validate();
        std::vector<double> trace{r0};
        double r_prev = r0;
        double r_star = r_prev;
        bool converged = false;
        for (int it = 0; it < kMaxIters; ++it) {
            r_star = optimal_reward(ups[j], ap, zeta);
            trace.push_back(r_star);
            if (std::abs(r_star - r_prev) < zeta) {
                converged = true;
                break;
            }
            r_prev = r_star;
        }
        if (!converged)
            throw iteration_limit_error("solve_stackelberg: reward fixed point did not converge for UAV " +
                                            std::to_string(j),
                                        trace);
        const double p_star = best_response_power(r_star, ups[j]);
        eq.powers_w[j] = p_star;
        eq.reward_rates[j] = r_star;
        eq.uav_utilities[j] = uav_utility(p_star, r_star, ups[j]);
        eq.alice_utilities[j] = alice_utility(p_star, r_star, ups[j], ap);
        eq.detect_probs[j] = detection_probability(p_star, ups[j], ap);
        eq.combination[j] = static_cast<int>(j);
        eq.combination_value += eq.alice_utilities[j];
        eq.reward_rate += r_star / static_cast<double>(n);
    }
    return eq;
}

namespace detail {

// true when lhs should replace rhs as the selected combination:
// greater value, then fewer members, then lexicographically smaller indices.
inline bool combination_preferred(double lhs_value, const std::vector<int>& lhs,
                                  double rhs_value, const std::vector<int>& rhs) {
    if (lhs_value != rhs_value) return lhs_value > rhs_value;
    if (lhs.size() != rhs.size()) return lhs.size() < rhs.size();
    return std::lexicographical_compare(lhs.begin(), lhs.end(), rhs.begin(), rhs.end());
}

}  // namespace detail

// Exhaustive search over UAV subsets with size in [min_size, max_size].
// Each subset is solved to equilibrium; subsets whose total payment exceeds
// Alice's budget are discarded. Returns per-UAV vectors over the full input
// list with the winning subset recorded in `combination`.
inline GameEquilibrium select_combination_sized(const std::vector<UavGameParams>& ups,
                                                const AliceParams& ap, double zeta, int min_size,
                                                int max_size) {
    const int n = static_cast<int>(ups.size());
    if (n < 1 || n > 12)
        throw validation_error("select_combination: UAV count must be in [1, 12] for exhaustive search");
    if (min_size < 1 || max_size < min_size || max_size > n)
        throw validation_error("select_combination: need 1 <= min_size <= max_size <= UAV count");

    const double r0 = ap.r_min;
    bool found = false;
    double best_value = 0.0;
    std::vector<int> best_members;
    GameEquilibrium best_eq;

    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        const int size = std::popcount(mask);
        if (size < min_size || size > max_size) continue;

        std::vector<int> members;
        std::vector<UavGameParams> subset;
        members.reserve(static_cast<std::size_t>(size));
        subset.reserve(static_cast<std::size_t>(size));
        for (int j = 0; j < n; ++j) {
            if (mask & (1u << j)) {
                members.push_back(j);
                subset.push_back(ups[static_cast<std::size_t>(j)]);
            }
        }

        const GameEquilibrium sub_eq = solve_stackelberg(subset, ap, zeta, r0);
        double payment = 0.0;
        for (std::size_t k = 0; k < subset.size(); ++k)
            payment += alice_payment(sub_eq.powers_w[k], sub_eq.reward_rates[k]);
        if (payment > ap.budget) continue;

        const double value = sub_eq.combination_value;
        if (!found || detail::combination_preferred(value, members, best_value, best_members)) {
            found = true;
            best_value = value;
            best_members = members;
            best_eq = sub_eq;
        }
    }
    if (!found)
        throw infeasible_error("select_combination: no subset satisfies the payment budget " +
                               std::to_string(ap.budget));

    // Report per-UAV quantities for the whole list; the subset solve and the
    // full solve agree because the game is per-link.
    GameEquilibrium eq = solve_stackelberg(ups, ap, zeta, r0);
    eq.combination = best_members;
    eq.combination_value = best_value;
    eq.reward_rate = 0.0;
    for (std::size_t k = 0; k < best_members.size(); ++k)
        eq.reward_rate += best_eq.reward_rates[k] / static_cast<double>(best_members.size());
    return eq;
}

inline GameEquilibrium select_combination(const std::vector<UavGameParams>& ups, const AliceParams& ap,
                                          double zeta, int max_size) {
    return select_combination_sized(ups, ap, zeta, 1, max_size);
}

}  // namespace uavnet
