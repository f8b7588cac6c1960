#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uavnet/errors.hpp"
#include "uavnet/scenario.hpp"
#include "uavnet/trainer.hpp"

namespace uavnet {

// Flat experiment configuration: every knob has a default, every key is
// known, snapshots round-trip byte-for-byte.
struct Config {
    // run
    std::uint64_t seed = 1;
    int uavs = 9;
    int gus = 20;
    double area_m = 3000.0;
    // training
    int iters = 50;
    int trajectories = 8;
    int timestep_subset = 4;
    double learning_rate = 0.05;
    double zeta = 1e-6;
    int workers = 1;
    int normalize = 1;
    int diffusion_steps = 32;
    double beta_start = 0.01;
    double beta_end = 0.2;
    int hidden_dim = 32;
    int eval_samples = 1;
    double edge_prob = 0.5;  // random baseline density
    // reward weights
    double alpha = 1.0;
    double beta = 0.001;
    double gamma = 1.0;
    double delta = 0.02;
    double energy_a = 1.0;
    double energy_b = 1.0;
    double energy_o = 1.0;
    double hover_base_w = 50.0;
    double altitude_coeff = 0.1;
    double link_power_w = 0.5;
    double flight_time_s = 1.0;
    // channel
    double channel_a = 9.61;
    double channel_b = 0.16;
    double carrier_hz = 2.4e9;
    double excess_los_db = 1.0;
    double excess_nlos_db = 20.0;
    double min_rx_power_dbm = -90.0;
    double alt_min_m = 100.0;
    double alt_max_m = 300.0;
    // game
    double ptx_min_dbm = 10.0;
    double ptx_max_dbm = 30.0;
    double willie_gain_db = 1.0;
    double detect_threshold = 0.6;
    double noise_sigma_w = 0.1;
    double noise_gain_db = 1.0;
    double mu = 1.0;
    double psi = 5.0;
    double omega = 1.0;
    double r_min = 0.1;
    double r_max = 20.0;
    double budget = 50.0;
    double power_cost_min = 1.0;
    double power_cost_max = 5.0;
    double gu_gain_min_db = 3.0;
    double gu_gain_max_db = 10.0;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ConfigField {
    const char* key;
    enum class Kind { U64, Int, Double } kind;
    void* ptr;
};

inline std::vector<ConfigField> config_fields(Config& c) {
    using K = ConfigField::Kind;
    return {
        {"seed", K::U64, &c.seed},
        {"uavs", K::Int, &c.uavs},
        {"gus", K::Int, &c.gus},
        {"area_m", K::Double, &c.area_m},
        {"iters", K::Int, &c.iters},
        {"trajectories", K::Int, &c.trajectories},
        {"timestep_subset", K::Int, &c.timestep_subset},
        {"learning_rate", K::Double, &c.learning_rate},
        {"zeta", K::Double, &c.zeta},
        {"workers", K::Int, &c.workers},
        {"normalize", K::Int, &c.normalize},
        {"diffusion_steps", K::Int, &c.diffusion_steps},
        {"beta_start", K::Double, &c.beta_start},
        {"beta_end", K::Double, &c.beta_end},
        {"hidden_dim", K::Int, &c.hidden_dim},
        {"eval_samples", K::Int, &c.eval_samples},
        {"edge_prob", K::Double, &c.edge_prob},
        {"alpha", K::Double, &c.alpha},
        {"beta", K::Double, &c.beta},
        {"gamma", K::Double, &c.gamma},
        {"delta", K::Double, &c.delta},
        {"energy_a", K::Double, &c.energy_a},
        {"energy_b", K::Double, &c.energy_b},
        {"energy_o", K::Double, &c.energy_o},
        {"hover_base_w", K::Double, &c.hover_base_w},
        {"altitude_coeff", K::Double, &c.altitude_coeff},
        {"link_power_w", K::Double, &c.link_power_w},
        {"flight_time_s", K::Double, &c.flight_time_s},
        {"channel_a", K::Double, &c.channel_a},
        {"channel_b", K::Double, &c.channel_b},
        {"carrier_hz", K::Double, &c.carrier_hz},
        {"excess_los_db", K::Double, &c.excess_los_db},
        {"excess_nlos_db", K::Double, &c.excess_nlos_db},
        {"min_rx_power_dbm", K::Double, &c.min_rx_power_dbm},
        {"alt_min_m", K::Double, &c.alt_min_m},
        {"alt_max_m", K::Double, &c.alt_max_m},
        {"ptx_min_dbm", K::Double, &c.ptx_min_dbm},
        {"ptx_max_dbm", K::Double, &c.ptx_max_dbm},
        {"willie_gain_db", K::Double, &c.willie_gain_db},
        {"detect_threshold", K::Double, &c.detect_threshold},
        {"noise_sigma_w", K::Double, &c.noise_sigma_w},
        {"noise_gain_db", K::Double, &c.noise_gain_db},
        {"mu", K::Double, &c.mu},
        {"psi", K::Double, &c.psi},
        {"omega", K::Double, &c.omega},
        {"r_min", K::Double, &c.r_min},
        {"r_max", K::Double, &c.r_max},
        {"budget", K::Double, &c.budget},
        {"power_cost_min", K::Double, &c.power_cost_min},
        {"power_cost_max", K::Double, &c.power_cost_max},
        {"gu_gain_min_db", K::Double, &c.gu_gain_min_db},
        {"gu_gain_max_db", K::Double, &c.gu_gain_max_db},
    };
}

}  // namespace detail

// Serializes the full effective configuration, one `key = value` per line,
// fixed key order, %.17g for reals so snapshots replay exactly.
inline std::string emit_config(const Config& cfg) {
    Config copy = cfg;
    std::ostringstream out;
    for (const auto& f : detail::config_fields(copy)) {
        out << f.key << " = ";
        switch (f.kind) {
            case detail::ConfigField::Kind::U64:
                out << *static_cast<std::uint64_t*>(f.ptr);
                break;
            case detail::ConfigField::Kind::Int:
                out << *static_cast<int*>(f.ptr);
                break;
            case detail::ConfigField::Kind::Double:
                out << detail::fmt_double(*static_cast<double*>(f.ptr));
                break;
        }
        out << "\n";
    }
    return out.str();
}

// Parses `key = value` lines over the defaults. Blank lines and lines
// starting with '#' are ignored; unknown keys and malformed values are
// rejected with the offending line number.
inline Config parse_config(std::istream& in) {
    Config cfg;
    auto fields = detail::config_fields(cfg);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(line_no) + ": empty key or value");

        const detail::ConfigField* field = nullptr;
        for (const auto& f : fields)
            if (key == f.key) {
                field = &f;
                break;
            }
        if (!field) throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");

        std::istringstream vs(value);
        bool ok = false;
        switch (field->kind) {
            case detail::ConfigField::Kind::U64:
                ok = static_cast<bool>(vs >> *static_cast<std::uint64_t*>(field->ptr));
                break;
            case detail::ConfigField::Kind::Int:
                ok = static_cast<bool>(vs >> *static_cast<int*>(field->ptr));
                break;
            case detail::ConfigField::Kind::Double:
                ok = static_cast<bool>(vs >> *static_cast<double*>(field->ptr));
                break;
        }
        std::string rest;
        if (!ok || (vs >> rest))
            throw config_error("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_config: cannot open " + path);
    return parse_config(in);
}

inline void save_config(const Config& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_config: cannot open " + path);
    out << emit_config(cfg);
    if (!out) throw io_error("save_config: write failed for " + path);
}

inline ScenarioTemplate scenario_template_from(const Config& cfg) {
    ScenarioTemplate t;
    t.area_m = cfg.area_m;
    t.channel = ChannelParams{cfg.channel_a, cfg.channel_b, cfg.carrier_hz,
                              cfg.excess_los_db, cfg.excess_nlos_db, cfg.min_rx_power_dbm};
    t.alt_min_m = cfg.alt_min_m;
    t.alt_max_m = cfg.alt_max_m;
    t.ptx_min_dbm = cfg.ptx_min_dbm;
    t.ptx_max_dbm = cfg.ptx_max_dbm;
    t.willie_gain_db = cfg.willie_gain_db;
    t.power_cost_min = cfg.power_cost_min;
    t.power_cost_max = cfg.power_cost_max;
    t.gu_gain_min_db = cfg.gu_gain_min_db;
    t.gu_gain_max_db = cfg.gu_gain_max_db;
    t.alice = AliceParams{cfg.mu,          cfg.psi,   cfg.omega, db_to_linear(cfg.noise_gain_db),
                          cfg.detect_threshold, cfg.noise_sigma_w, cfg.r_min, cfg.r_max, cfg.budget};
    return t;
}

inline Scenario scenario_from(const Config& cfg) {
    return generate_scenario(scenario_template_from(cfg), cfg.seed, cfg.uavs, cfg.gus);
}

inline RewardWeights reward_weights_from(const Config& cfg) {
    RewardWeights w;
    w.alpha = cfg.alpha;
    w.beta = cfg.beta;
    w.gamma = cfg.gamma;
    w.delta = cfg.delta;
    w.energy_a = cfg.energy_a;
    w.energy_b = cfg.energy_b;
    w.energy_o = cfg.energy_o;
    w.hover_base_w = cfg.hover_base_w;
    w.altitude_coeff_w_per_m = cfg.altitude_coeff;
    w.link_power_w = cfg.link_power_w;
    w.flight_time_s = cfg.flight_time_s;
    return w;
}

inline TrainConfig train_config_from(const Config& cfg) {
    TrainConfig t;
    t.n_iters = cfg.iters;
    t.n_trajectories = cfg.trajectories;
    t.timestep_subset_size = cfg.timestep_subset;
    t.learning_rate = cfg.learning_rate;
    t.seed = cfg.seed;
    t.schedule = DiffusionSchedule::linear(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end);
    t.weights = reward_weights_from(cfg);
    t.zeta = cfg.zeta;
    t.normalize = cfg.normalize != 0;
    t.n_workers = cfg.workers;
    t.hidden_dim = cfg.hidden_dim;
    return t;
}

// --- CSV ---

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string csv_cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void emit_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("emit_csv: cannot open " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw validation_error("emit_csv: row width does not match header in " + path);
        for (std::size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw io_error("emit_csv: write failed for " + path);
}

// --- run orchestration ---

struct RunArtifacts {
    std::string history_csv;
    std::string topology_path;
    std::string equilibrium_csv;
    std::string snapshot_path;
    std::string checkpoint_path;
    std::string timing_csv;
};

// History schema is fixed; wall_ms is emitted as 0 so reruns are
// byte-identical, with measured timings in the separate timing CSV.
inline void write_history_csv(const TrainHistory& history, const std::string& path) {
    CsvTable t;
    t.header = {"iter", "mean_reward", "std_reward", "grad_norm", "wall_ms"};
    for (const auto& it : history.iterations)
        t.rows.push_back({std::to_string(it.iter), csv_cell(it.mean_reward), csv_cell(it.std_reward),
                          csv_cell(it.grad_norm), csv_cell(0.0)});
    emit_csv(t, path);
}

inline void write_timing_csv(const TrainHistory& history, const std::string& path) {
    CsvTable t;
    t.header = {"iter", "wall_ms"};
    for (const auto& it : history.iterations)
        t.rows.push_back({std::to_string(it.iter), csv_cell(it.wall_ms)});
    emit_csv(t, path);
}

inline void write_equilibrium_csv(const TopologyEvaluation& ev, const Scenario& sc,
                                  const std::string& path) {
    CsvTable t;
    t.header = {"uav", "active", "power_w", "reward_rate", "payment", "uav_utility", "alice_utility",
                "detect_prob"};
    std::vector<int> slot(static_cast<std::size_t>(sc.n_uavs()), -1);
    for (std::size_t k = 0; k < ev.active.size(); ++k) slot[static_cast<std::size_t>(ev.active[k])] = static_cast<int>(k);
    for (int j = 0; j < sc.n_uavs(); ++j) {
        const int k = slot[static_cast<std::size_t>(j)];
        if (k < 0) {
            t.rows.push_back({std::to_string(j), "0", csv_cell(0.0), csv_cell(0.0), csv_cell(0.0),
                              csv_cell(0.0), csv_cell(0.0), csv_cell(0.0)});
        } else {
            const auto& eq = ev.equilibrium;
            const auto idx = static_cast<std::size_t>(k);
            t.rows.push_back({std::to_string(j), "1", csv_cell(eq.powers_w[idx]),
                              csv_cell(eq.reward_rates[idx]),
                              csv_cell(alice_payment(eq.powers_w[idx], eq.reward_rates[idx])),
                              csv_cell(eq.uav_utilities[idx]), csv_cell(eq.alice_utilities[idx]),
                              csv_cell(eq.detect_probs[idx])});
        }
    }
    emit_csv(t, path);
}

// Draws `samples` topologies from the trained policy with per-index eval
// seeds and keeps the best-scoring one (first wins ties).
inline TopologyGraph sample_best_topology(const PolicyParams& params, const Scenario& sc,
                                          const DiffusionSchedule& sch, const RewardWeights& w,
                                          double zeta, std::uint64_t seed, int samples) {
    if (samples < 1) throw config_error("sample_best_topology: need at least one sample");
    TopologyGraph best(sc.n_uavs());
    double best_reward = 0.0;
    for (int k = 0; k < samples; ++k) {
        Rng rng(derive_seed(seed, 0xe7a1ULL, static_cast<std::uint64_t>(k)));
        const Trajectory traj = sample_trajectory(params, sc, sch, rng);
        const double r = evaluate_with_incentives(traj.clean(), sc, w, zeta).breakdown.total;
        if (k == 0 || r > best_reward) {
            best = traj.clean();
            best_reward = r;
        }
    }
    return best;
}

// Full experiment: train, emit history/timing, sample the final topology,
// report its equilibrium, snapshot the config, save the checkpoint.
inline RunArtifacts run_experiment(const Config& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("run_experiment: cannot create output directory " + out_dir);

    const Scenario sc = scenario_from(cfg);
    const TrainConfig tc = train_config_from(cfg);
    const TrainHistory history = train_policy(tc, sc);

    const TopologyGraph final_topology =
        sample_best_topology(history.final_params, sc, tc.schedule, tc.weights, tc.zeta, cfg.seed,
                             cfg.eval_samples);
    const TopologyEvaluation ev = evaluate_with_incentives(final_topology, sc, tc.weights, tc.zeta);

    RunArtifacts art;
    art.history_csv = (fs::path(out_dir) / "history.csv").string();
    art.timing_csv = (fs::path(out_dir) / "timing.csv").string();
    art.topology_path = (fs::path(out_dir) / "topology.edges").string();
    art.equilibrium_csv = (fs::path(out_dir) / "equilibrium.csv").string();
    art.snapshot_path = (fs::path(out_dir) / "config.snapshot").string();
    art.checkpoint_path = (fs::path(out_dir) / "policy.checkpoint").string();

    write_history_csv(history, art.history_csv);
    write_timing_csv(history, art.timing_csv);
    save_edge_list(final_topology, art.topology_path);
    write_equilibrium_csv(ev, sc, art.equilibrium_csv);
    save_config(cfg, art.snapshot_path);
    save_policy(history.final_params, art.checkpoint_path);
    return art;
}

struct SweepRow {
    int size = 0;
    double utility = 0.0;
    bool feasible = false;
};

// Best combination value per exact subset size under the payment budget.
inline std::vector<SweepRow> sweep_uav_count(const Scenario& sc, const std::vector<int>& sizes,
                                             const AliceParams& ap, double zeta = 1e-6) {
    std::vector<SweepRow> rows;
    rows.reserve(sizes.size());
    for (int size : sizes) {
        SweepRow row;
        row.size = size;
        try {
            const GameEquilibrium eq = select_combination_sized(sc.uav_game, ap, zeta, size, size);
            row.utility = eq.combination_value;
            row.feasible = true;
        } catch (const infeasible_error&) {
            row.utility = std::numeric_limits<double>::quiet_NaN();
            row.feasible = false;
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    CsvTable t;
    t.header = {"size", "utility", "feasible"};
    for (const auto& r : rows)
        t.rows.push_back({std::to_string(r.size), csv_cell(r.utility), r.feasible ? "1" : "0"});
    emit_csv(t, path);
}

}  // namespace uavnet
