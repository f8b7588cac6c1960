#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "uavnet/errors.hpp"
#include "uavnet/scenario.hpp"
#include "uavnet/units.hpp"

namespace uavnet {

// Undirected UAV-UAV topology. Adjacency is the free state; transmit powers
// and the UAV x GU coverage map are operating state attached by the caller
// and always derived together, never edited directly.
struct TopologyGraph {
    int n_uavs = 0;
    std::vector<std::uint8_t> adj;        // n*n, symmetric, zero diagonal
    std::vector<double> tx_powers_w;      // empty until operating state attached
    std::vector<std::uint8_t> gu_cover;   // n_uavs * n_gus, derived from powers
    int n_gus = 0;

    explicit TopologyGraph(int n = 0)
        : n_uavs(n), adj(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

    bool edge(int u, int v) const {
        return adj[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_uavs) +
                   static_cast<std::size_t>(v)] != 0;
    }

    void set_edge(int u, int v, bool present) {
        const auto n = static_cast<std::size_t>(n_uavs);
        adj[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = present ? 1 : 0;
        adj[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = present ? 1 : 0;
    }

    int degree(int u) const {
        int d = 0;
        for (int v = 0; v < n_uavs; ++v)
            if (v != u && edge(u, v)) ++d;
        return d;
    }

    int edge_count() const {
        int m = 0;
        for (int u = 0; u < n_uavs; ++u)
            for (int v = u + 1; v < n_uavs; ++v)
                if (edge(u, v)) ++m;
        return m;
    }

    bool has_operating_state() const { return !tx_powers_w.empty(); }

    bool covers(int uav, int gu) const {
        return gu_cover[static_cast<std::size_t>(uav) * static_cast<std::size_t>(n_gus) +
                        static_cast<std::size_t>(gu)] != 0;
    }
};

// Number of unordered UAV pairs.
inline int potential_edge_count(int n_uavs) { return n_uavs * (n_uavs - 1) / 2; }

// Flat index of the unordered pair (u, v), u < v, in row-major order.
inline int pair_index(int u, int v, int n_uavs) {
    return u * n_uavs - u * (u + 1) / 2 + (v - u - 1);
}

inline std::pair<int, int> pair_from_index(int e, int n_uavs) {
    for (int u = 0; u < n_uavs; ++u) {
        const int row = n_uavs - u - 1;
        if (e < row) return {u, u + e + 1};
        e -= row;
    }
    throw validation_error("pair_from_index: edge index out of range");
}

enum class EdgeOpKind { Add, Delete, Maintain };

struct EdgeOp {
    int u = 0;
    int v = 0;
    EdgeOpKind op = EdgeOpKind::Maintain;
};

// Applies link operations in order; later operations on the same pair win.
// Maintain never changes adjacency. Operating state is untouched (coverage
// depends on powers and geometry only).
inline TopologyGraph apply_edge_ops(const TopologyGraph& g, const std::vector<EdgeOp>& ops) {
    TopologyGraph out = g;
    for (const auto& op : ops) {
        if (op.u == op.v) throw validation_error("apply_edge_ops: self-loop operation");
        if (op.u < 0 || op.v < 0 || op.u >= g.n_uavs || op.v >= g.n_uavs)
            throw validation_error("apply_edge_ops: UAV index out of range");
        if (op.op == EdgeOpKind::Add) out.set_edge(op.u, op.v, true);
        else if (op.op == EdgeOpKind::Delete) out.set_edge(op.u, op.v, false);
    }
    return out;
}

inline int connected_component_count(const TopologyGraph& g) {
    const int n = g.n_uavs;
    if (n == 0) return 0;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    int components = 0;
    for (int start = 0; start < n; ++start) {
        if (seen[static_cast<std::size_t>(start)]) continue;
        ++components;
        stack.push_back(start);
        seen[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (v != u && g.edge(u, v) && !seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
            }
        }
    }
    return components;
}

// Derives gu_cover from the channel model at the given transmit powers and
// stores both on the graph. A power of 0 W means the UAV is not transmitting
// and covers nothing.
inline void attach_operating_state(TopologyGraph& g, const Scenario& sc, std::vector<double> powers_w) {
    if (static_cast<int>(powers_w.size()) != g.n_uavs || g.n_uavs != sc.n_uavs())
        throw validation_error("attach_operating_state: power vector size must match UAV count");
    g.n_gus = sc.n_gus();
    g.tx_powers_w = std::move(powers_w);
    g.gu_cover.assign(static_cast<std::size_t>(g.n_uavs) * static_cast<std::size_t>(g.n_gus), 0);
    for (int j = 0; j < g.n_uavs; ++j) {
        const double p = g.tx_powers_w[static_cast<std::size_t>(j)];
        if (!(p >= 0.0)) throw validation_error("attach_operating_state: negative transmit power");
        if (p == 0.0) continue;
        const double p_dbm = watts_to_dbm(p);
        const double h = sc.placement.uav_xyz[static_cast<std::size_t>(j)][2];
        for (int i = 0; i < g.n_gus; ++i) {
            const double s = sc.placement.horizontal_distance(static_cast<std::size_t>(i),
                                                              static_cast<std::size_t>(j));
            if (received_power_dbm(p_dbm, h, s, sc.channel) >= sc.channel.min_rx_power_dbm)
                g.gu_cover[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.n_gus) +
                           static_cast<std::size_t>(i)] = 1;
        }
    }
}

namespace detail {

inline void require_operating_state(const TopologyGraph& g, const char* op) {
    if (!g.has_operating_state())
        throw validation_error(std::string(op) + ": graph has no operating state (powers/coverage)");
}

// Number of UAVs covering GU i.
inline int cover_multiplicity(const TopologyGraph& g, int i) {
    int m = 0;
    for (int j = 0; j < g.n_uavs; ++j)
        if (g.covers(j, i)) ++m;
    return m;
}

}  // namespace detail

struct RewardWeights {
    double alpha = 1.0;
    double beta = 0.001;
    double gamma = 1.0;
    double delta = 0.02;
    double energy_a = 1.0;     // flight mix
    double energy_b = 1.0;     // transmission mix
    double energy_o = 1.0;     // link-maintenance mix
    double hover_base_w = 50.0;
    double altitude_coeff_w_per_m = 0.1;
    double link_power_w = 0.5;
    double flight_time_s = 1.0;

    void validate() const {
        for (double v : {alpha, beta, gamma, delta, energy_a, energy_b, energy_o, hover_base_w,
                         altitude_coeff_w_per_m, link_power_w, flight_time_s})
            if (!(v >= 0.0)) throw validation_error("RewardWeights: all weights must be >= 0");
    }
};

struct RewardBreakdown {
    double cov = 0.0;
    double ener = 0.0;
    double conn = 0.0;
    double over = 0.0;
    double total = 0.0;
};

// Fraction of GUs covered by at least one UAV.
inline double coverage_reward(const TopologyGraph& g, const Scenario& sc) {
    detail::require_operating_state(g, "coverage_reward");
    const int n_gus = sc.n_gus();
    int covered = 0;
    for (int i = 0; i < n_gus; ++i)
        if (detail::cover_multiplicity(g, i) >= 1) ++covered;
    return static_cast<double>(covered) / n_gus;
}

// a * sum_j (hover + alt_coeff * h_j) * t_f  +  b * sum_j P_tx_j * t_f
//   +  o * sum_links 2 * P_l * t_f
inline double energy_reward(const TopologyGraph& g, const Scenario& sc, const RewardWeights& w) {
    detail::require_operating_state(g, "energy_reward");
    double fly = 0.0, tra = 0.0;
    for (int j = 0; j < g.n_uavs; ++j) {
        fly += (w.hover_base_w + w.altitude_coeff_w_per_m *
                                     sc.placement.uav_xyz[static_cast<std::size_t>(j)][2]) *
               w.flight_time_s;
        tra += g.tx_powers_w[static_cast<std::size_t>(j)] * w.flight_time_s;
    }
    const double cha = 2.0 * w.link_power_w * w.flight_time_s * g.edge_count();
    return w.energy_a * fly + w.energy_b * tra + w.energy_o * cha;
}

// 0 when the UAV graph is a single component, 100 otherwise.
inline double connectivity_reward(const TopologyGraph& g) {
    return connected_component_count(g) == 1 ? 0.0 : 100.0;
}

// 5 * (m_i - 1) summed over GUs covered by m_i >= 2 UAVs.
inline double overlap_reward(const TopologyGraph& g, const Scenario& sc) {
    detail::require_operating_state(g, "overlap_reward");
    double total = 0.0;
    for (int i = 0; i < sc.n_gus(); ++i) {
        const int m = detail::cover_multiplicity(g, i);
        if (m >= 2) total += 5.0 * (m - 1);
    }
    return total;
}

// total = alpha*cov - beta*ener - gamma*conn - delta*over, assembled from the
// component fields so the identity holds bit-for-bit.
inline RewardBreakdown total_reward(const TopologyGraph& g, const Scenario& sc, const RewardWeights& w) {
    w.validate();
    RewardBreakdown r;
    r.cov = coverage_reward(g, sc);
    r.ener = energy_reward(g, sc, w);
    r.conn = connectivity_reward(g);
    r.over = overlap_reward(g, sc);
    r.total = w.alpha * r.cov - w.beta * r.ener - w.gamma * r.conn - w.delta * r.over;
    return r;
}

// --- edge-list serialization (canonical u < v, lexicographic order) ---

inline std::string write_edge_list(const TopologyGraph& g) {
    std::ostringstream out;
    out << "nodes " << g.n_uavs << "\n";
    for (int u = 0; u < g.n_uavs; ++u)
        for (int v = u + 1; v < g.n_uavs; ++v)
            if (g.edge(u, v)) out << u << " " << v << "\n";
    return out.str();
}

inline TopologyGraph read_edge_list(std::istream& in) {
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "nodes" || n < 0)
        throw io_error("read_edge_list: expected 'nodes <count>' header");
    TopologyGraph g(n);
    int u, v;
    while (in >> u >> v) {
        if (u < 0 || v < 0 || u >= n || v >= n || u >= v)
            throw io_error("read_edge_list: invalid edge " + std::to_string(u) + " " + std::to_string(v));
        g.set_edge(u, v, true);
    }
    return g;
}

inline void save_edge_list(const TopologyGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_edge_list: cannot open " + path);
    out << write_edge_list(g);
    if (!out) throw io_error("save_edge_list: write failed for " + path);
}

inline TopologyGraph load_edge_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_edge_list: cannot open " + path);
    return read_edge_list(in);
}

}  // namespace uavnet
