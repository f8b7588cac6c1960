#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "uavnet/covert_game.hpp"
#include "uavnet/diffusion.hpp"
#include "uavnet/errors.hpp"
#include "uavnet/rng.hpp"
#include "uavnet/scenario.hpp"
#include "uavnet/topology.hpp"

namespace uavnet {

enum class GradientEstimator { Epg, Reinforce };

struct TrainConfig {
    int n_iters = 50;
    int n_trajectories = 8;       // K
    int timestep_subset_size = 4; // |T_k|
    double learning_rate = 0.05;
    std::uint64_t seed = 1;
    DiffusionSchedule schedule = DiffusionSchedule::linear(32);
    RewardWeights weights{};
    double zeta = 1e-6;
    bool normalize = true;
    int n_workers = 1;
    int hidden_dim = 32;
    GradientEstimator estimator = GradientEstimator::Epg;

    void validate() const {
        if (n_iters < 1) throw config_error("TrainConfig: n_iters must be >= 1");
        if (hidden_dim < 1) throw config_error("TrainConfig: hidden_dim must be >= 1");
        if (n_trajectories < 2)
            throw config_error("TrainConfig: need at least 2 trajectories for reward normalization");
        if (timestep_subset_size < 1 || timestep_subset_size > schedule.n_steps)
            throw config_error("TrainConfig: timestep_subset_size must lie in [1, n_steps]");
        if (!(learning_rate > 0.0)) throw config_error("TrainConfig: learning_rate must be > 0");
        if (!(zeta > 0.0)) throw config_error("TrainConfig: zeta must be > 0");
        if (n_workers < 1) throw config_error("TrainConfig: n_workers must be >= 1");
        schedule.validate();
        weights.validate();
    }
};

struct IterationStats {
    int iter = 0;
    double mean_reward = 0.0;
    double std_reward = 0.0;
    double grad_norm = 0.0;
    double wall_ms = 0.0;
};

struct TrainHistory {
    std::vector<IterationStats> iterations;
    PolicyParams final_params;
};

// Centers to zero mean and scales by the Bessel-corrected standard
// deviation; a degenerate batch (all rewards equal) maps to all zeros.
inline std::vector<double> normalize_rewards(const std::vector<double>& rewards) {
    const std::size_t k = rewards.size();
    if (k < 2) throw config_error("normalize_rewards: need at least 2 rewards");
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(k);
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    std::vector<double> out(k, 0.0);
    if (sd < 1e-12) return out;
    for (std::size_t i = 0; i < k; ++i) out[i] = (rewards[i] - mean) / sd;
    return out;
}

// g = (1/K) sum_k (T/|T_k|) sum_{t in T_k} reward_k * grad log p(S_0^k | S_t^k)
inline std::vector<double> eager_policy_gradient(std::vector<Trajectory>& trajs, const PolicyParams& p,
                                                 const Scenario& sc) {
    if (trajs.empty()) throw config_error("eager_policy_gradient: no trajectories");
    const int T = p.n_steps;
    std::vector<double> grad(p.theta.size(), 0.0);
    for (auto& traj : trajs) {
        if (traj.n_steps() != T)
            throw config_error("eager_policy_gradient: trajectory length does not match policy");
        if (traj.sampled_steps.empty())
            throw config_error("eager_policy_gradient: trajectory carries no sampled timesteps");
        std::vector<double> accum(p.theta.size(), 0.0);
        for (int t : traj.sampled_steps) {
            const std::vector<double> g =
                grad_log_prob(p, traj.clean(), traj.states[static_cast<std::size_t>(t)], t, sc);
            for (std::size_t i = 0; i < accum.size(); ++i) accum[i] += g[i];
        }
        const double scale =
            traj.reward * static_cast<double>(T) / static_cast<double>(traj.sampled_steps.size());
        for (auto& v : accum) v *= scale;
        traj.log_grad_accum = accum;
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += accum[i];
    }
    for (auto& v : grad) v /= static_cast<double>(trajs.size());
    return grad;
}

// Full-chain estimator: g = (1/K) sum_k reward_k sum_t grad log p(S_{t-1}^k | S_t^k)
// with the exact per-step sampling density of the reverse chain.
inline std::vector<double> reinforce_gradient(std::vector<Trajectory>& trajs, const PolicyParams& p,
                                              const Scenario& sc, const DiffusionSchedule& sch) {
    if (trajs.empty()) throw config_error("reinforce_gradient: no trajectories");
    if (sch.n_steps != p.n_steps)
        throw config_error("reinforce_gradient: schedule length does not match policy");
    std::vector<double> grad(p.theta.size(), 0.0);
    for (auto& traj : trajs) {
        if (traj.n_steps() != sch.n_steps)
            throw config_error("reinforce_gradient: trajectory length does not match schedule");
        std::vector<double> accum(p.theta.size(), 0.0);
        for (int t = 1; t <= sch.n_steps; ++t)
            accumulate_step_log_density_grad(p, traj.states[static_cast<std::size_t>(t - 1)],
                                             traj.states[static_cast<std::size_t>(t)], t, sc, sch,
                                             accum);
        for (auto& v : accum) v *= traj.reward;
        traj.log_grad_accum = accum;
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += accum[i];
    }
    for (auto& v : grad) v /= static_cast<double>(trajs.size());
    return grad;
}

// theta <- theta + eta * g, nothing else: no clipping, no momentum.
inline PolicyParams update_params(const PolicyParams& p, const std::vector<double>& g, double eta) {
    if (g.size() != p.theta.size()) throw config_error("update_params: gradient dimension mismatch");
    PolicyParams out = p;
    for (std::size_t i = 0; i < out.theta.size(); ++i) out.theta[i] += eta * g[i];
    return out;
}

// UAVs that participate in relaying: degree >= 1, or the lone UAV when there
// is only one.
inline std::vector<int> active_uavs(const TopologyGraph& g) {
    if (g.n_uavs == 1) return {0};
    std::vector<int> active;
    for (int j = 0; j < g.n_uavs; ++j)
        if (g.degree(j) >= 1) active.push_back(j);
    return active;
}

struct TopologyEvaluation {
    RewardBreakdown breakdown;
    std::vector<double> powers_w;
    GameEquilibrium equilibrium;  // over the active subset; empty combination if no UAV is active
    std::vector<int> active;
};

// Couples the incentive game into the topology reward: solve the game for
// the active UAVs, set their equilibrium powers (idle UAVs transmit 0 W),
// derive coverage, and score.
inline TopologyEvaluation evaluate_with_incentives(const TopologyGraph& g_in, const Scenario& sc,
                                                   const RewardWeights& w, double zeta) {
    TopologyEvaluation ev;
    ev.active = active_uavs(g_in);
    ev.powers_w.assign(static_cast<std::size_t>(g_in.n_uavs), 0.0);
    if (!ev.active.empty()) {
        std::vector<UavGameParams> subset;
        subset.reserve(ev.active.size());
        for (int j : ev.active) subset.push_back(sc.uav_game[static_cast<std::size_t>(j)]);
        ev.equilibrium = solve_stackelberg(subset, sc.alice, zeta, sc.alice.r_min);
        for (std::size_t k = 0; k < ev.active.size(); ++k)
            ev.powers_w[static_cast<std::size_t>(ev.active[k])] = ev.equilibrium.powers_w[k];
    }
    TopologyGraph g = g_in;
    attach_operating_state(g, sc, ev.powers_w);
    ev.breakdown = total_reward(g, sc, w);
    return ev;
}

namespace detail {

inline void run_indexed_parallel(int n_tasks, int n_workers, const std::function<void(int)>& task) {
    if (n_workers <= 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n_tasks; i += n_workers) task(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// One training run. Per iteration: sample K trajectories, couple the game
// into each final graph's reward, normalize, estimate the gradient, ascend.
// Trajectory sampling and scoring are per-index seeded, so histories are
// identical for any worker count.
inline TrainHistory train_policy(const TrainConfig& cfg, const Scenario& sc) {
    cfg.validate();
    sc.validate();
    const int T = cfg.schedule.n_steps;
    const int K = cfg.n_trajectories;

    PolicyParams params = PolicyParams::random_init(cfg.seed, T, cfg.hidden_dim);
    TrainHistory history;
    history.iterations.reserve(static_cast<std::size_t>(cfg.n_iters));

    for (int iter = 0; iter < cfg.n_iters; ++iter) {
        const auto t_start = std::chrono::steady_clock::now();
        std::vector<Trajectory> trajs(static_cast<std::size_t>(K));
        std::vector<double> raw_rewards(static_cast<std::size_t>(K), 0.0);
        std::vector<std::string> worker_errors(static_cast<std::size_t>(K));

        detail::run_indexed_parallel(K, cfg.n_workers, [&](int k) {
            try {
                Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iter),
                                    static_cast<std::uint64_t>(k)));
                Trajectory traj = sample_trajectory(params, sc, cfg.schedule, rng);
                traj.sampled_steps = rng.sample_without_replacement(1, T, cfg.timestep_subset_size);
                raw_rewards[static_cast<std::size_t>(k)] =
                    evaluate_with_incentives(traj.clean(), sc, cfg.weights, cfg.zeta).breakdown.total;
                trajs[static_cast<std::size_t>(k)] = std::move(traj);
            } catch (const std::exception& e) {
                worker_errors[static_cast<std::size_t>(k)] = e.what();
            }
        });
        for (const auto& err : worker_errors)
            if (!err.empty())
                throw numerical_error("train_policy: iteration " + std::to_string(iter) + ": " + err);

        const std::vector<double> used =
            cfg.normalize ? normalize_rewards(raw_rewards) : raw_rewards;
        for (int k = 0; k < K; ++k) trajs[static_cast<std::size_t>(k)].reward = used[static_cast<std::size_t>(k)];

        const std::vector<double> grad =
            cfg.estimator == GradientEstimator::Epg
                ? eager_policy_gradient(trajs, params, sc)
                : reinforce_gradient(trajs, params, sc, cfg.schedule);
        params = update_params(params, grad, cfg.learning_rate);

        IterationStats stats;
        stats.iter = iter;
        stats.mean_reward = std::accumulate(raw_rewards.begin(), raw_rewards.end(), 0.0) / K;
        double ss = 0.0;
        for (double r : raw_rewards) ss += (r - stats.mean_reward) * (r - stats.mean_reward);
        stats.std_reward = std::sqrt(ss / (K - 1));
        double g2 = 0.0;
        for (double v : grad) g2 += v * v;
        stats.grad_norm = std::sqrt(g2);
        stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                  t_start)
                            .count();
        history.iterations.push_back(stats);
    }
    history.final_params = params;
    return history;
}

inline TrainHistory train_gdpo(const TrainConfig& cfg, const Scenario& sc) {
    TrainConfig c = cfg;
    c.estimator = GradientEstimator::Epg;
    return train_policy(c, sc);
}

// Greedy baseline: repeatedly add the edge with the largest marginal gain in
// the incentive-coupled total reward; ties break on lexicographic edge order.
inline TopologyGraph greedy_topology(const Scenario& sc, const RewardWeights& w, double zeta = 1e-6) {
    TopologyGraph g(sc.n_uavs());
    double current = evaluate_with_incentives(g, sc, w, zeta).breakdown.total;
    while (true) {
        double best_gain = 0.0;
        int best_u = -1, best_v = -1;
        for (int u = 0; u < g.n_uavs; ++u)
            for (int v = u + 1; v < g.n_uavs; ++v) {
                if (g.edge(u, v)) continue;
                TopologyGraph trial = g;
                trial.set_edge(u, v, true);
                const double gain =
                    evaluate_with_incentives(trial, sc, w, zeta).breakdown.total - current;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_u = u;
                    best_v = v;
                }
            }
        if (best_u < 0) break;
        g.set_edge(best_u, best_v, true);
        current = evaluate_with_incentives(g, sc, w, zeta).breakdown.total;
    }
    return g;
}

// Uniform random topology over UAV pairs.
inline TopologyGraph random_topology(const Scenario& sc, double edge_prob, Rng& rng) {
    if (!(edge_prob >= 0.0) || !(edge_prob <= 1.0))
        throw validation_error("random_topology: edge_prob must lie in [0, 1]");
    TopologyGraph g(sc.n_uavs());
    for (int u = 0; u < g.n_uavs; ++u)
        for (int v = u + 1; v < g.n_uavs; ++v) g.set_edge(u, v, rng.bernoulli(edge_prob));
    return g;
}

}  // namespace uavnet
