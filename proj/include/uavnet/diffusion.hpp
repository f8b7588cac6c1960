#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "uavnet/errors.hpp"
#include "uavnet/rng.hpp"
#include "uavnet/scenario.hpp"
#include "uavnet/topology.hpp"

namespace uavnet {

// Discrete edge-wise diffusion over UAV adjacency matrices. The forward
// process flips each potential edge independently; the learned reverse
// process predicts, per edge, the probability that the edge is present in
// the clean graph S_0 given the noisy graph S_t.

struct DiffusionSchedule {
    int n_steps = 32;
    std::vector<double> flip_probs;  // beta_t for t = 1..T, each in (0, 0.5)
    std::vector<double> cum_flip;    // marginal flip prob vs S_0 for t = 0..T; cum_flip[0] = 0

    // Linear beta ramp; mixes toward coin-flip edges by t = T.
    static DiffusionSchedule linear(int n_steps, double beta_start = 0.01, double beta_end = 0.2) {
        if (n_steps < 1) throw validation_error("DiffusionSchedule: need at least one step");
        DiffusionSchedule s;
        s.n_steps = n_steps;
        s.flip_probs.resize(static_cast<std::size_t>(n_steps));
        for (int t = 0; t < n_steps; ++t)
            s.flip_probs[static_cast<std::size_t>(t)] =
                n_steps == 1 ? beta_start
                             : beta_start + (beta_end - beta_start) * t / (n_steps - 1);
        s.rebuild_cumulative();
        s.validate();
        return s;
    }

    void rebuild_cumulative() {
        cum_flip.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
        double stay = 1.0;  // product of (1 - 2 beta_s)
        for (int t = 1; t <= n_steps; ++t) {
            stay *= 1.0 - 2.0 * flip_probs[static_cast<std::size_t>(t - 1)];
            cum_flip[static_cast<std::size_t>(t)] = 0.5 * (1.0 - stay);
        }
    }

    void validate() const {
        if (static_cast<int>(flip_probs.size()) != n_steps)
            throw validation_error("DiffusionSchedule: flip_probs length must equal n_steps");
        if (static_cast<int>(cum_flip.size()) != n_steps + 1)
            throw validation_error("DiffusionSchedule: cumulative table out of date");
        for (double b : flip_probs)
            if (!(b > 0.0) || !(b < 0.5))
                throw validation_error("DiffusionSchedule: flip probabilities must lie in (0, 0.5)");
        for (int t = 1; t <= n_steps; ++t)
            if (!(cum_flip[static_cast<std::size_t>(t)] > cum_flip[static_cast<std::size_t>(t - 1)]))
                throw validation_error("DiffusionSchedule: marginal flip probability must increase with t");
    }
};

// Per-edge feature layout fed to the denoiser:
//   [edge bit in S_t, t/T, distance(u,v)/area, deg_a/J, deg_b/J, cov_a, cov_b]
// where the two (degree, coverage) node pairs are sorted so the output is
// invariant under swapping u and v.
inline constexpr int kEdgeFeatureCount = 7;

// Two-layer perceptron over edge features: tanh hidden layer, one logit out.
// theta layout: W1 (hidden x input, row-major), b1, w2, b2.
struct PolicyParams {
    int input_dim = kEdgeFeatureCount;
    int hidden_dim = 32;
    int n_steps = 32;  // diffusion schedule length the policy was built for
    std::vector<double> theta;

    static int theta_size(int input_dim, int hidden_dim) {
        return hidden_dim * input_dim + hidden_dim + hidden_dim + 1;
    }

    static PolicyParams zeros(int n_steps = 32, int hidden_dim = 32) {
        PolicyParams p;
        p.hidden_dim = hidden_dim;
        p.n_steps = n_steps;
        p.theta.assign(static_cast<std::size_t>(theta_size(p.input_dim, hidden_dim)), 0.0);
        return p;
    }

    static PolicyParams random_init(std::uint64_t seed, int n_steps = 32, int hidden_dim = 32,
                                    double scale = 0.1) {
        PolicyParams p = zeros(n_steps, hidden_dim);
        Rng rng(derive_seed(seed, 0x7e7a11ULL));
        // Gaussian via Box-Muller on the deterministic uniform stream.
        for (auto& v : p.theta) {
            const double u1 = std::max(rng.uniform01(), 1e-300);
            const double u2 = rng.uniform01();
            v = scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
        return p;
    }

    void validate() const {
        if (input_dim != kEdgeFeatureCount)
            throw config_error("PolicyParams: unsupported input_dim " + std::to_string(input_dim));
        if (hidden_dim < 1 || n_steps < 1)
            throw config_error("PolicyParams: hidden_dim and n_steps must be >= 1");
        if (static_cast<int>(theta.size()) != theta_size(input_dim, hidden_dim))
            throw config_error("PolicyParams: theta size does not match architecture");
        for (double v : theta)
            if (!std::isfinite(v)) throw config_error("PolicyParams: non-finite parameter");
    }
};

namespace detail {

struct EdgeFeatureContext {
    const Scenario* sc = nullptr;
    std::vector<int> degrees;
    double t_norm = 0.0;

    EdgeFeatureContext(const TopologyGraph& gt, int t, int n_steps, const Scenario& scenario)
        : sc(&scenario), degrees(static_cast<std::size_t>(gt.n_uavs)),
          t_norm(static_cast<double>(t) / n_steps) {
        for (int u = 0; u < gt.n_uavs; ++u) degrees[static_cast<std::size_t>(u)] = gt.degree(u);
    }

    void fill(const TopologyGraph& gt, int u, int v, double* out) const {
        const auto& pl = sc->placement;
        const double dx = pl.uav_xyz[static_cast<std::size_t>(u)][0] - pl.uav_xyz[static_cast<std::size_t>(v)][0];
        const double dy = pl.uav_xyz[static_cast<std::size_t>(u)][1] - pl.uav_xyz[static_cast<std::size_t>(v)][1];
        const double n = static_cast<double>(gt.n_uavs);
        double deg_a = degrees[static_cast<std::size_t>(u)] / n;
        double deg_b = degrees[static_cast<std::size_t>(v)] / n;
        double cov_a = sc->node_coverage_frac[static_cast<std::size_t>(u)];
        double cov_b = sc->node_coverage_frac[static_cast<std::size_t>(v)];
        if (deg_b < deg_a || (deg_b == deg_a && cov_b < cov_a)) {
            std::swap(deg_a, deg_b);
            std::swap(cov_a, cov_b);
        }
        out[0] = gt.edge(u, v) ? 1.0 : 0.0;
        out[1] = t_norm;
        out[2] = std::hypot(dx, dy) / pl.area_bound_m;
        out[3] = deg_a;
        out[4] = deg_b;
        out[5] = cov_a;
        out[6] = cov_b;
    }
};

// forward pass; returns the logit and leaves tanh activations in `hidden`.
inline double mlp_logit(const PolicyParams& p, const double* x, std::vector<double>& hidden) {
    const int in = p.input_dim, hid = p.hidden_dim;
    const double* w1 = p.theta.data();
    const double* b1 = w1 + static_cast<std::size_t>(hid) * in;
    const double* w2 = b1 + hid;
    const double b2 = w2[hid];
    hidden.resize(static_cast<std::size_t>(hid));
    double logit = b2;
    for (int h = 0; h < hid; ++h) {
        double a = b1[h];
        const double* row = w1 + static_cast<std::size_t>(h) * in;
        for (int i = 0; i < in; ++i) a += row[i] * x[i];
        const double th = std::tanh(a);
        hidden[static_cast<std::size_t>(h)] = th;
        logit += w2[h] * th;
    }
    return logit;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// accumulate d(logit)/d(theta) * dlogit into grad
inline void mlp_backprop(const PolicyParams& p, const double* x, const std::vector<double>& hidden,
                         double dlogit, std::span<double> grad) {
    const int in = p.input_dim, hid = p.hidden_dim;
    const double* w2 = p.theta.data() + static_cast<std::size_t>(hid) * in + hid;
    double* gw1 = grad.data();
    double* gb1 = gw1 + static_cast<std::size_t>(hid) * in;
    double* gw2 = gb1 + hid;
    double* gb2 = gw2 + hid;
    *gb2 += dlogit;
    for (int h = 0; h < hid; ++h) {
        const double th = hidden[static_cast<std::size_t>(h)];
        gw2[h] += dlogit * th;
        const double dh = dlogit * w2[h] * (1.0 - th * th);
        gb1[h] += dh;
        double* row = gw1 + static_cast<std::size_t>(h) * in;
        for (int i = 0; i < in; ++i) row[i] += dh * x[i];
    }
}

inline void check_graph_scenario(const PolicyParams& p, const TopologyGraph& g, int t, const Scenario& sc,
                                 const char* op) {
    p.validate();
    if (g.n_uavs != sc.n_uavs())
        throw config_error(std::string(op) + ": graph node count does not match scenario");
    if (t < 1 || t > p.n_steps)
        throw config_error(std::string(op) + ": timestep out of [1, n_steps]");
}

inline double clamp_prob(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

// One-step reverse posterior for a single edge, x0-parameterized:
//   P(x_{t-1}=1 | x_t, p0) with flip kernel beta_t and marginal flip
//   probability qbar_{t-1} between S_0 and S_{t-1}.
inline double posterior_edge_prob(bool bit_t, double p0, double beta_t, double qbar_prev) {
    const double f1 = bit_t ? 1.0 - beta_t : beta_t;  // q(x_t | x_{t-1} = 1)
    const double f0 = bit_t ? beta_t : 1.0 - beta_t;
    const double m1 = (1.0 - qbar_prev) * p0 + qbar_prev * (1.0 - p0);
    const double m0 = 1.0 - m1;
    return f1 * m1 / (f1 * m1 + f0 * m0);
}

// d log P(b_prev | x_t) / d logit of the clean-edge prediction. Bounded even
// for saturated predictions.
inline double posterior_dlog_dlogit(bool bit_prev, bool bit_t, double p0, double beta_t,
                                    double qbar_prev) {
    const double f1 = bit_t ? 1.0 - beta_t : beta_t;
    const double f0 = bit_t ? beta_t : 1.0 - beta_t;
    const double m1 = (1.0 - qbar_prev) * p0 + qbar_prev * (1.0 - p0);
    const double m0 = 1.0 - m1;
    const double denom = f1 * m1 + f0 * m0;
    const double dp = p0 * (1.0 - p0);  // d p0 / d logit
    const double shared = (1.0 - 2.0 * qbar_prev) * dp;
    const double own = bit_prev ? shared / m1 : -shared / m0;
    return own - (f1 - f0) * shared / denom;
}

}  // namespace detail

// Forward corruption: each potential edge flipped independently with the
// cumulative probability for step t, relative to g0.
inline TopologyGraph forward_noise(const TopologyGraph& g0, int t, const DiffusionSchedule& sch,
                                   Rng& rng) {
    sch.validate();
    if (t < 1 || t > sch.n_steps) throw validation_error("forward_noise: timestep out of [1, n_steps]");
    const double q = sch.cum_flip[static_cast<std::size_t>(t)];
    TopologyGraph gt(g0.n_uavs);
    for (int u = 0; u < g0.n_uavs; ++u)
        for (int v = u + 1; v < g0.n_uavs; ++v) {
            const bool flip = rng.bernoulli(q);
            gt.set_edge(u, v, g0.edge(u, v) != flip);
        }
    return gt;
}

// Per-edge probability that the edge is present in the clean graph, indexed
// by pair_index over u < v.
inline std::vector<double> denoise_predict(const PolicyParams& p, const TopologyGraph& gt, int t,
                                           const Scenario& sc) {
    detail::check_graph_scenario(p, gt, t, sc, "denoise_predict");
    const detail::EdgeFeatureContext ctx(gt, t, p.n_steps, sc);
    std::vector<double> probs(static_cast<std::size_t>(potential_edge_count(gt.n_uavs)));
    std::vector<double> hidden;
    double x[kEdgeFeatureCount];
    for (int u = 0; u < gt.n_uavs; ++u)
        for (int v = u + 1; v < gt.n_uavs; ++v) {
            ctx.fill(gt, u, v, x);
            probs[static_cast<std::size_t>(pair_index(u, v, gt.n_uavs))] =
                detail::logistic(detail::mlp_logit(p, x, hidden));
        }
    return probs;
}

// log p_theta(S_0 | S_t): sum of per-edge Bernoulli log-likelihoods of S_0's
// bits under the prediction made from S_t.
inline double log_prob_clean_given_noisy(const PolicyParams& p, const TopologyGraph& s0,
                                         const TopologyGraph& st, int t, const Scenario& sc) {
    if (s0.n_uavs != st.n_uavs)
        throw config_error("log_prob_clean_given_noisy: node-count mismatch between S_0 and S_t");
    const std::vector<double> probs = denoise_predict(p, st, t, sc);
    double lp = 0.0;
    for (int u = 0; u < s0.n_uavs; ++u)
        for (int v = u + 1; v < s0.n_uavs; ++v) {
            const double q = detail::clamp_prob(probs[static_cast<std::size_t>(pair_index(u, v, s0.n_uavs))]);
            lp += s0.edge(u, v) ? std::log(q) : std::log1p(-q);
        }
    return lp;
}

// Exact gradient of log_prob_clean_given_noisy with respect to theta.
inline std::vector<double> grad_log_prob(const PolicyParams& p, const TopologyGraph& s0,
                                         const TopologyGraph& st, int t, const Scenario& sc) {
    if (s0.n_uavs != st.n_uavs)
        throw config_error("grad_log_prob: node-count mismatch between S_0 and S_t");
    detail::check_graph_scenario(p, st, t, sc, "grad_log_prob");
    const detail::EdgeFeatureContext ctx(st, t, p.n_steps, sc);
    std::vector<double> grad(p.theta.size(), 0.0);
    std::vector<double> hidden;
    double x[kEdgeFeatureCount];
    for (int u = 0; u < s0.n_uavs; ++u)
        for (int v = u + 1; v < s0.n_uavs; ++v) {
            ctx.fill(st, u, v, x);
            const double prob = detail::logistic(detail::mlp_logit(p, x, hidden));
            const double bit = s0.edge(u, v) ? 1.0 : 0.0;
            detail::mlp_backprop(p, x, hidden, bit - prob, grad);  // d log-lik / d logit = bit - prob
        }
    return grad;
}

struct Trajectory {
    std::vector<TopologyGraph> states;  // states[t] = S_t, t = 0..T
    std::vector<int> sampled_steps;     // T_k, subset of {1..T}; filled by the trainer
    double reward = 0.0;                // reward attached by the trainer (normalized for estimators)
    std::vector<double> log_grad_accum; // per-trajectory gradient contribution, filled by estimators

    const TopologyGraph& clean() const { return states.front(); }
    int n_steps() const { return static_cast<int>(states.size()) - 1; }
};

// Ancestral sampling of the reverse chain: S_T is coin-flip noise, each step
// draws S_{t-1} edge-wise from the x0-parameterized posterior. Edge order is
// fixed, so a seed pins the trajectory bit-for-bit.
inline Trajectory sample_trajectory(const PolicyParams& p, const Scenario& sc,
                                    const DiffusionSchedule& sch, Rng& rng) {
    p.validate();
    sch.validate();
    if (sch.n_steps != p.n_steps)
        throw config_error("sample_trajectory: schedule length does not match policy metadata");
    const int n = sc.n_uavs();
    const int T = sch.n_steps;

    Trajectory traj;
    traj.states.assign(static_cast<std::size_t>(T) + 1, TopologyGraph(n));
    TopologyGraph& noise = traj.states[static_cast<std::size_t>(T)];
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) noise.set_edge(u, v, rng.bernoulli(0.5));

    for (int t = T; t >= 1; --t) {
        const TopologyGraph& st = traj.states[static_cast<std::size_t>(t)];
        const std::vector<double> probs0 = denoise_predict(p, st, t, sc);
        const double beta_t = sch.flip_probs[static_cast<std::size_t>(t - 1)];
        const double qbar_prev = sch.cum_flip[static_cast<std::size_t>(t - 1)];
        TopologyGraph prev(n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                const double p0 =
                    detail::clamp_prob(probs0[static_cast<std::size_t>(pair_index(u, v, n))]);
                const double pp = detail::posterior_edge_prob(st.edge(u, v), p0, beta_t, qbar_prev);
                prev.set_edge(u, v, rng.bernoulli(pp));
            }
        traj.states[static_cast<std::size_t>(t - 1)] = std::move(prev);
    }
    return traj;
}

// Gradient of the log-density of one realized reverse step S_t -> S_{t-1},
// i.e. grad_theta log p_theta(S_{t-1} | S_t). Used by the REINFORCE baseline.
inline void accumulate_step_log_density_grad(const PolicyParams& p, const TopologyGraph& s_prev,
                                             const TopologyGraph& st, int t, const Scenario& sc,
                                             const DiffusionSchedule& sch, std::span<double> grad) {
    detail::check_graph_scenario(p, st, t, sc, "step_log_density_grad");
    const detail::EdgeFeatureContext ctx(st, t, p.n_steps, sc);
    const double beta_t = sch.flip_probs[static_cast<std::size_t>(t - 1)];
    const double qbar_prev = sch.cum_flip[static_cast<std::size_t>(t - 1)];
    std::vector<double> hidden;
    double x[kEdgeFeatureCount];
    for (int u = 0; u < st.n_uavs; ++u)
        for (int v = u + 1; v < st.n_uavs; ++v) {
            ctx.fill(st, u, v, x);
            const double p0 = detail::clamp_prob(detail::logistic(detail::mlp_logit(p, x, hidden)));
            const double dlogit = detail::posterior_dlog_dlogit(s_prev.edge(u, v), st.edge(u, v), p0,
                                                                beta_t, qbar_prev);
            detail::mlp_backprop(p, x, hidden, dlogit, grad);
        }
}

// --- checkpoint format: versioned flat vector with architecture header ---
//
//   uavnet-policy v1
//   input_dim <n>
//   hidden_dim <n>
//   n_steps <n>
//   theta <count>
//   <one %.17g value per line>

inline void save_policy(const PolicyParams& p, const std::string& path) {
    p.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_policy: cannot open " + path);
    out << "uavnet-policy v1\n";
    out << "input_dim " << p.input_dim << "\n";
    out << "hidden_dim " << p.hidden_dim << "\n";
    out << "n_steps " << p.n_steps << "\n";
    out << "theta " << p.theta.size() << "\n";
    char buf[64];
    for (double v : p.theta) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    if (!out) throw io_error("save_policy: write failed for " + path);
}

inline PolicyParams load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_policy: cannot open " + path);
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "uavnet-policy" || version != "v1")
        throw io_error("load_policy: bad header in " + path);
    PolicyParams p;
    std::string key;
    std::size_t count = 0;
    if (!(in >> key >> p.input_dim) || key != "input_dim")
        throw io_error("load_policy: expected input_dim in " + path);
    if (!(in >> key >> p.hidden_dim) || key != "hidden_dim")
        throw io_error("load_policy: expected hidden_dim in " + path);
    if (!(in >> key >> p.n_steps) || key != "n_steps")
        throw io_error("load_policy: expected n_steps in " + path);
    if (!(in >> key >> count) || key != "theta")
        throw io_error("load_policy: expected theta count in " + path);
    p.theta.resize(count);
    for (auto& v : p.theta)
        if (!(in >> v)) throw io_error("load_policy: truncated theta block in " + path);
    p.validate();
    return p;
}

}  // namespace uavnet
