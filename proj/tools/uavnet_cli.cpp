// Command-line front end: scenario generation, game solving, policy
// training, evaluation, the UAV-count sweep, and the baselines.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uavnet/harness.hpp"

namespace fs = std::filesystem;
using namespace uavnet;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_path;
    std::string out_dir = "out";
    std::optional<int> iters;
    std::optional<int> trajectories;
    std::optional<int> uavs;
    std::optional<int> gus;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "Master seed");
    cmd->add_option("--config", args.config_path, "Config file (key = value lines)");
    cmd->add_option("--out-dir", args.out_dir, "Output directory");
    cmd->add_option("--iters", args.iters, "Training iterations");
    cmd->add_option("--trajectories", args.trajectories, "Trajectories per iteration");
    cmd->add_option("--uavs", args.uavs, "UAV count");
    cmd->add_option("--gus", args.gus, "Ground-user count");
}

Config effective_config(const CommonArgs& args) {
    Config cfg = args.config_path ? load_config(*args.config_path) : Config{};
    if (args.seed) cfg.seed = *args.seed;
    if (args.iters) cfg.iters = *args.iters;
    if (args.trajectories) cfg.trajectories = *args.trajectories;
    if (args.uavs) cfg.uavs = *args.uavs;
    if (args.gus) cfg.gus = *args.gus;
    return cfg;
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + out_dir);
}

void write_scenario_files(const Scenario& sc, const Config& cfg, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    CsvTable gus;
    gus.header = {"gu", "x_m", "y_m", "gain_db"};
    for (int i = 0; i < sc.n_gus(); ++i) {
        const auto& g = sc.placement.gu_xy[static_cast<std::size_t>(i)];
        gus.rows.push_back({std::to_string(i), csv_cell(g[0]), csv_cell(g[1]),
                            csv_cell(sc.gu_gain_db[static_cast<std::size_t>(i)])});
    }
    emit_csv(gus, (fs::path(out_dir) / "gu.csv").string());

    CsvTable uavs;
    uavs.header = {"uav", "x_m", "y_m", "h_m", "power_cost", "p_min_w", "p_max_w", "coverage_frac"};
    for (int j = 0; j < sc.n_uavs(); ++j) {
        const auto& u = sc.placement.uav_xyz[static_cast<std::size_t>(j)];
        const auto& up = sc.uav_game[static_cast<std::size_t>(j)];
        uavs.rows.push_back({std::to_string(j), csv_cell(u[0]), csv_cell(u[1]), csv_cell(u[2]),
                             csv_cell(up.power_cost_coeff), csv_cell(up.p_min_w), csv_cell(up.p_max_w),
                             csv_cell(sc.node_coverage_frac[static_cast<std::size_t>(j)])});
    }
    emit_csv(uavs, (fs::path(out_dir) / "uav.csv").string());
    save_config(cfg, (fs::path(out_dir) / "config.snapshot").string());
}

int cmd_gen_scenario(const CommonArgs& args) {
    const Config cfg = effective_config(args);
    const Scenario sc = scenario_from(cfg);
    write_scenario_files(sc, cfg, args.out_dir);
    std::cout << "scenario: " << sc.n_uavs() << " UAVs, " << sc.n_gus() << " GUs, area "
              << sc.placement.area_bound_m << " m, seed " << cfg.seed << "\n";
    std::cout << "wrote " << args.out_dir << "/gu.csv, uav.csv, config.snapshot\n";
    return 0;
}

int cmd_solve_game(const CommonArgs& args) {
    const Config cfg = effective_config(args);
    const Scenario sc = scenario_from(cfg);
    ensure_out_dir(args.out_dir);
    const GameEquilibrium eq =
        select_combination(sc.uav_game, sc.alice, cfg.zeta, sc.n_uavs());

    CsvTable t;
    t.header = {"uav", "selected", "power_w", "reward_rate", "payment", "uav_utility",
                "alice_utility", "detect_prob"};
    for (int j = 0; j < sc.n_uavs(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const bool selected =
            std::find(eq.combination.begin(), eq.combination.end(), j) != eq.combination.end();
        t.rows.push_back({std::to_string(j), selected ? "1" : "0", csv_cell(eq.powers_w[idx]),
                          csv_cell(eq.reward_rates[idx]),
                          csv_cell(alice_payment(eq.powers_w[idx], eq.reward_rates[idx])),
                          csv_cell(eq.uav_utilities[idx]), csv_cell(eq.alice_utilities[idx]),
                          csv_cell(eq.detect_probs[idx])});
    }
    const std::string path = (fs::path(args.out_dir) / "equilibrium.csv").string();
    emit_csv(t, path);
    save_config(cfg, (fs::path(args.out_dir) / "config.snapshot").string());

    std::cout << "selected combination {";
    for (std::size_t k = 0; k < eq.combination.size(); ++k)
        std::cout << (k ? " " : "") << eq.combination[k];
    std::cout << "} value " << eq.combination_value << ", mean rate " << eq.reward_rate << "\n";
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args, GradientEstimator estimator) {
    Config cfg = effective_config(args);
    ensure_out_dir(args.out_dir);
    if (estimator == GradientEstimator::Reinforce) {
        TrainConfig tc = train_config_from(cfg);
        tc.estimator = GradientEstimator::Reinforce;
        const Scenario sc = scenario_from(cfg);
        const TrainHistory history = train_policy(tc, sc);
        write_history_csv(history, (fs::path(args.out_dir) / "history.csv").string());
        write_timing_csv(history, (fs::path(args.out_dir) / "timing.csv").string());
        const TopologyGraph topo = sample_best_topology(history.final_params, sc, tc.schedule,
                                                        tc.weights, tc.zeta, cfg.seed, cfg.eval_samples);
        save_edge_list(topo, (fs::path(args.out_dir) / "topology.edges").string());
        write_equilibrium_csv(evaluate_with_incentives(topo, sc, tc.weights, tc.zeta), sc,
                              (fs::path(args.out_dir) / "equilibrium.csv").string());
        save_config(cfg, (fs::path(args.out_dir) / "config.snapshot").string());
        save_policy(history.final_params, (fs::path(args.out_dir) / "policy.checkpoint").string());
        std::cout << "reinforce baseline finished: final mean reward "
                  << history.iterations.back().mean_reward << "\n";
        return 0;
    }
    const RunArtifacts art = run_experiment(cfg, args.out_dir);
    std::cout << "training finished; artifacts:\n"
              << "  " << art.history_csv << "\n  " << art.topology_path << "\n  "
              << art.equilibrium_csv << "\n  " << art.snapshot_path << "\n  " << art.checkpoint_path
              << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& checkpoint, int samples) {
    const Config cfg = effective_config(args);
    const Scenario sc = scenario_from(cfg);
    const PolicyParams params = load_policy(checkpoint);
    const TrainConfig tc = train_config_from(cfg);
    if (params.n_steps != tc.schedule.n_steps)
        throw config_error("eval: checkpoint diffusion steps differ from config");
    ensure_out_dir(args.out_dir);

    CsvTable t;
    t.header = {"sample", "total", "cov", "ener", "conn", "over", "edges", "components"};
    TopologyGraph best(sc.n_uavs());
    double best_reward = 0.0;
    for (int k = 0; k < samples; ++k) {
        Rng rng(derive_seed(cfg.seed, 0xe7a1ULL, static_cast<std::uint64_t>(k)));
        const Trajectory traj = sample_trajectory(params, sc, tc.schedule, rng);
        const TopologyEvaluation ev = evaluate_with_incentives(traj.clean(), sc, tc.weights, tc.zeta);
        t.rows.push_back({std::to_string(k), csv_cell(ev.breakdown.total), csv_cell(ev.breakdown.cov),
                          csv_cell(ev.breakdown.ener), csv_cell(ev.breakdown.conn),
                          csv_cell(ev.breakdown.over), std::to_string(traj.clean().edge_count()),
                          std::to_string(connected_component_count(traj.clean()))});
        if (k == 0 || ev.breakdown.total > best_reward) {
            best = traj.clean();
            best_reward = ev.breakdown.total;
        }
    }
    emit_csv(t, (fs::path(args.out_dir) / "eval.csv").string());
    save_edge_list(best, (fs::path(args.out_dir) / "topology.edges").string());
    std::cout << "evaluated " << samples << " samples; best reward " << best_reward << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const Config cfg = effective_config(args);
    const Scenario sc = scenario_from(cfg);
    ensure_out_dir(args.out_dir);
    std::vector<int> sizes;
    for (int s = 1; s <= sc.n_uavs(); ++s) sizes.push_back(s);
    const std::vector<SweepRow> rows = sweep_uav_count(sc, sizes, sc.alice, cfg.zeta);
    const std::string path = (fs::path(args.out_dir) / "sweep.csv").string();
    write_sweep_csv(rows, path);
    save_config(cfg, (fs::path(args.out_dir) / "config.snapshot").string());
    for (const auto& r : rows)
        std::cout << "size " << r.size << ": "
                  << (r.feasible ? "utility " + csv_cell(r.utility) : std::string("infeasible")) << "\n";
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_baseline_static(const CommonArgs& args, const std::string& kind) {
    const Config cfg = effective_config(args);
    const Scenario sc = scenario_from(cfg);
    const RewardWeights w = reward_weights_from(cfg);
    ensure_out_dir(args.out_dir);

    TopologyGraph topo(sc.n_uavs());
    if (kind == "greedy") {
        topo = greedy_topology(sc, w, cfg.zeta);
    } else {
        Rng rng(derive_seed(cfg.seed, 0xba5eULL));
        topo = random_topology(sc, cfg.edge_prob, rng);
    }
    const TopologyEvaluation ev = evaluate_with_incentives(topo, sc, w, cfg.zeta);
    save_edge_list(topo, (fs::path(args.out_dir) / "topology.edges").string());
    write_equilibrium_csv(ev, sc, (fs::path(args.out_dir) / "equilibrium.csv").string());
    save_config(cfg, (fs::path(args.out_dir) / "config.snapshot").string());

    CsvTable t;
    t.header = {"total", "cov", "ener", "conn", "over", "edges", "components"};
    t.rows.push_back({csv_cell(ev.breakdown.total), csv_cell(ev.breakdown.cov),
                      csv_cell(ev.breakdown.ener), csv_cell(ev.breakdown.conn),
                      csv_cell(ev.breakdown.over), std::to_string(topo.edge_count()),
                      std::to_string(connected_component_count(topo))});
    emit_csv(t, (fs::path(args.out_dir) / "baseline.csv").string());
    std::cout << kind << " baseline reward " << ev.breakdown.total << " with "
              << topo.edge_count() << " edges\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-organizing UAV relay network toolkit"};
    app.require_subcommand(1);

    CommonArgs gen_args, solve_args, train_args, eval_args, sweep_args, base_args;

    CLI::App* gen = app.add_subcommand("gen-scenario", "Generate and dump a scenario");
    add_common(gen, gen_args);

    CLI::App* solve = app.add_subcommand("solve-game", "Solve the incentive game and select UAVs");
    add_common(solve, solve_args);

    CLI::App* train = app.add_subcommand("train", "Train the graph-diffusion policy");
    add_common(train, train_args);

    CLI::App* eval = app.add_subcommand("eval", "Sample topologies from a trained policy");
    add_common(eval, eval_args);
    std::string checkpoint;
    int eval_samples = 16;
    eval->add_option("--checkpoint", checkpoint, "Policy checkpoint file")->required();
    eval->add_option("--samples", eval_samples, "Number of topologies to sample");

    CLI::App* sweep = app.add_subcommand("sweep-uavs", "Best combination utility per UAV count");
    add_common(sweep, sweep_args);

    CLI::App* baseline = app.add_subcommand("baseline", "Run a baseline: greedy, random, reinforce");
    add_common(baseline, base_args);
    std::string baseline_kind;
    baseline->add_option("kind", baseline_kind, "greedy|random|reinforce")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_scenario(gen_args);
        if (solve->parsed()) return cmd_solve_game(solve_args);
        if (train->parsed()) return cmd_train(train_args, GradientEstimator::Epg);
        if (eval->parsed()) return cmd_eval(eval_args, checkpoint, eval_samples);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (baseline->parsed()) {
            if (baseline_kind == "reinforce") return cmd_train(base_args, GradientEstimator::Reinforce);
            if (baseline_kind == "greedy" || baseline_kind == "random")
                return cmd_baseline_static(base_args, baseline_kind);
            throw validation_error("unknown baseline '" + baseline_kind + "'");
        }
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
