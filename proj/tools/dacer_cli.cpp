#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dacer/config.hpp"
#include "dacer/errors.hpp"
#include "dacer/eval.hpp"
#include "dacer/landscape.hpp"
#include "dacer/metrics.hpp"
#include "dacer/trainer.hpp"

namespace fs = std::filesystem;
using namespace dacer;

namespace {

// Peaks closer than this merge into one reported maximum.
constexpr double kPeakClusterRadius = 1.0;

std::vector<std::array<double, 2>> parse_starts(const std::string& csv) {
    std::vector<double> vals;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ',')) {
        try {
            size_t pos = 0;
            vals.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("starts: '" + item + "' is not a number");
        }
    }
    if (vals.empty() || vals.size() % 2 != 0)
        throw ConfigError("starts: expected an even comma-separated list of coordinates");
    std::vector<std::array<double, 2>> starts;
    for (size_t i = 0; i < vals.size(); i += 2) starts.push_back({vals[i], vals[i + 1]});
    return starts;
}

std::string sibling(const std::string& checkpoint, const std::string& out_dir,
                    const std::string& file) {
    fs::path dir = out_dir.empty() ? fs::path(checkpoint).parent_path() : fs::path(out_dir);
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return (dir / file).string();
}

int cmd_train(const std::string& config_path, uint64_t seed, bool seed_given,
              const std::string& env, const std::string& noise_mode, int diffusion_steps,
              const std::string& out_dir) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    if (seed_given) cfg.seed = seed;
    if (!env.empty()) cfg.env = env;
    if (!noise_mode.empty()) cfg.noise_mode = noise_mode;
    if (diffusion_steps > 0) cfg.diffusion_steps = diffusion_steps;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    TrainResult result = train(cfg);
    std::cout << "run_dir " << result.run_dir << "\n"
              << "checkpoint " << result.checkpoint_path << "\n"
              << "steps " << result.steps_completed << "\n"
              << "critic_updates " << result.critic_updates << "\n"
              << "policy_updates " << result.policy_updates << "\n"
              << "alpha_updates " << result.alpha_updates << "\n"
              << "final_alpha " << result.final_alpha << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, int episodes, uint64_t seed) {
    LoadedAgent loaded = load_agent(checkpoint);
    auto env = make_env(loaded.cfg.env, loaded.cfg.multigoal_spec());
    Rng rng(seed);
    double mean = evaluate(loaded.agent.policy, *env, episodes, rng);
    std::cout.precision(17);
    std::cout << "mean_return " << mean << "\n";
    return 0;
}

int cmd_export_q(const std::string& checkpoint, int resolution, uint64_t seed,
                 const std::string& out_dir) {
    LoadedAgent loaded = load_agent(checkpoint);
    Rng rng(seed);
    LandscapeGrid grid = compute_q_landscape(loaded.agent.policy, loaded.agent.critics,
                                             resolution, loaded.cfg.mg_half_width, rng);
    std::vector<Peak> clusters = cluster_peaks(detect_peaks(grid), kPeakClusterRadius);

    write_landscape_csv(grid, sibling(checkpoint, out_dir, "landscape.csv"));
    write_peaks_csv(clusters, sibling(checkpoint, out_dir, "peaks.csv"));
    std::vector<std::array<double, 2>> marks;
    if (loaded.cfg.env == "multigoal")
        for (const auto& goal : loaded.cfg.multigoal_spec().goals) marks.push_back(goal);
    render_landscape_png(grid, marks, sibling(checkpoint, out_dir, "landscape.png"));

    std::cout.precision(17);
    std::cout << "peaks " << clusters.size() << "\n";
    for (const Peak& p : clusters)
        std::cout << "peak " << p.x << " " << p.y << " " << p.q << "\n";
    return 0;
}

int cmd_trajectories(const std::string& checkpoint, const std::string& starts_csv, int n,
                     uint64_t seed, const std::string& out_dir) {
    LoadedAgent loaded = load_agent(checkpoint);
    auto env = make_env(loaded.cfg.env, loaded.cfg.multigoal_spec());
    std::vector<std::array<double, 2>> starts = parse_starts(starts_csv);
    Rng rng(seed);
    std::vector<TrajectoryFan> fans =
        sample_trajectories(loaded.agent.policy, *env, starts, n, rng);

    write_trajectories_csv(fans, sibling(checkpoint, out_dir, "trajectories.csv"));
    render_trajectories_png(fans, loaded.cfg.multigoal_spec(),
                            sibling(checkpoint, out_dir, "trajectories.png"));

    const int goal_count =
        static_cast<int>(loaded.cfg.multigoal_spec().goals.size());
    for (size_t si = 0; si < fans.size(); ++si) {
        std::vector<int> bins = goal_histogram(fans[si], goal_count);
        std::cout << "start " << fans[si].start[0] << "," << fans[si].start[1] << " goals";
        for (int g = 0; g < goal_count; ++g) std::cout << " " << bins[static_cast<size_t>(g)];
        std::cout << " none " << bins.back() << " distinct " << distinct_goals_reached(fans[si])
                  << "\n";
    }
    return 0;
}

int cmd_report(const std::string& runs_dir) {
    // Accept either a directory of run directories or a single run directory.
    std::vector<fs::path> run_dirs;
    if (fs::exists(fs::path(runs_dir) / "metrics.csv")) {
        run_dirs.push_back(runs_dir);
    } else if (fs::is_directory(runs_dir)) {
        for (const auto& entry : fs::directory_iterator(runs_dir))
            if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv"))
                run_dirs.push_back(entry.path());
    }
    if (run_dirs.empty())
        throw ConfigError("report: no run directories with metrics.csv under '" + runs_dir + "'");
    std::sort(run_dirs.begin(), run_dirs.end());

    struct Group {
        std::vector<double> finals;
        std::vector<uint64_t> seeds;
    };
    std::map<std::string, Group> groups;
    for (const fs::path& dir : run_dirs) {
        TrainConfig cfg = parse_config_file((dir / "config.txt").string());
        RunMetrics metrics = RunMetrics::read_csv((dir / "metrics.csv").string());
        double fm = final_metric(metrics, cfg.total_steps);
        Group& g = groups[cfg.env + "/" + cfg.noise_mode];
        g.finals.push_back(fm);
        g.seeds.push_back(cfg.seed);
    }

    std::cout << "group,runs,final_mean,final_std\n";
    std::cout.precision(17);
    for (const auto& [name, g] : groups) {
        auto [mean, std_dev] = aggregate_runs(g.finals);
        std::cout << name << "," << g.finals.size() << "," << mean << "," << std_dev << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app {"Diffusion-policy actor-critic: training, evaluation, and exporters"};
    app.require_subcommand(1);

    // train
    std::string config_path, env, noise_mode, out_dir;
    uint64_t seed = 0;
    int diffusion_steps = 0;
    auto* train_cmd = app.add_subcommand("train", "Train an agent");
    train_cmd->add_option("--config", config_path, "key=value config file");
    auto* seed_opt = train_cmd->add_option("--seed", seed, "RNG seed");
    train_cmd->add_option("--env", env, "environment name (multigoal|bandit)");
    train_cmd->add_option("--noise-mode", noise_mode,
                          "exploration mode (adaptive|fixed|linear|none)");
    train_cmd->add_option("--diffusion-steps", diffusion_steps, "denoising chain length");
    train_cmd->add_option("--out-dir", out_dir, "run output directory");

    // eval
    std::string checkpoint;
    int episodes = 10;
    uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--episodes", episodes, "episodes to average");
    eval_cmd->add_option("--seed", eval_seed, "RNG seed");

    // export-q
    std::string q_checkpoint, q_out;
    int resolution = 50;
    uint64_t q_seed = 0;
    auto* q_cmd = app.add_subcommand("export-q", "Export the value landscape and action field");
    q_cmd->add_option("--checkpoint", q_checkpoint, "checkpoint file")->required();
    q_cmd->add_option("--resolution", resolution, "grid resolution (>= 50)");
    q_cmd->add_option("--seed", q_seed, "RNG seed");
    q_cmd->add_option("--out-dir", q_out, "output directory (default: beside the checkpoint)");

    // trajectories
    std::string t_checkpoint, starts_csv = "0,0", t_out;
    int n_rollouts = 100;
    uint64_t t_seed = 0;
    auto* t_cmd = app.add_subcommand("trajectories", "Roll out evaluation trajectory fans");
    t_cmd->add_option("--checkpoint", t_checkpoint, "checkpoint file")->required();
    t_cmd->add_option("--starts", starts_csv, "flat comma list of start coordinates");
    t_cmd->add_option("--n", n_rollouts, "rollouts per start");
    t_cmd->add_option("--seed", t_seed, "RNG seed");
    t_cmd->add_option("--out-dir", t_out, "output directory (default: beside the checkpoint)");

    // report
    std::string runs_dir;
    auto* r_cmd = app.add_subcommand("report", "Aggregate run results into a mean/std table");
    r_cmd->add_option("--runs", runs_dir, "directory of run directories")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed())
            return cmd_train(config_path, seed, seed_opt->count() > 0, env, noise_mode,
                             diffusion_steps, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(checkpoint, episodes, eval_seed);
        if (q_cmd->parsed()) return cmd_export_q(q_checkpoint, resolution, q_seed, q_out);
        if (t_cmd->parsed())
            return cmd_trajectories(t_checkpoint, starts_csv, n_rollouts, t_seed, t_out);
        if (r_cmd->parsed()) return cmd_report(runs_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
