#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dacer/envs.hpp"

namespace dacer {

// Every training knob in one place. Defaults are the full-scale values; the
// bundled experiment configs override sizes downward so runs fit on a laptop
// core.
struct TrainConfig {
    int64_t total_steps = 100000;
    int64_t warmup_size = 30000;  // environment steps stored before any update
    int batch_size = 256;
    double gamma = 0.99;
    double rho = 0.005;           // target-net blend-in rate (retention = 1 - rho)
    int policy_delay = 2;         // critic updates per policy update
    int64_t alpha_delay = 10000;  // steps between entropy estimates / alpha updates
    double lambda = 0.1;          // exploration noise scale
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;
    double alpha_lr = 3e-2;
    int diffusion_steps = 20;     // T
    int gmm_components = 3;       // K
    int entropy_samples = 200;    // action draws per state for the entropy estimate
    int entropy_state_batch = 32; // states per entropy estimate
    double reward_scale = 0.2;    // applied at buffer insertion
    uint64_t seed = 0;
    std::string env = "multigoal";
    std::string noise_mode = "adaptive"; // adaptive|fixed|linear|none
    double alpha_init = 0.27;
    double fixed_alpha = 0.1;
    double linear_from = 0.27;
    double linear_to = 0.1;
    double target_entropy_per_dim = -0.9;
    uint64_t buffer_capacity = 1000000;
    std::vector<int> hidden = {256, 256, 256};
    int embed_dim = 16;
    int64_t eval_interval = 5000;
    int eval_episodes = 10;
    int64_t checkpoint_interval = 10000;
    int checkpoint_keep = 3;
    int64_t log_interval = 100;
    double grad_clip = 0.0;        // global gradient-norm clip; 0 = off
    bool final_step_noise = false; // add chain noise at t=1 as well
    std::string out_dir;           // empty = derive from env/seed/timestamp

    // Environment constants (multigoal).
    double mg_half_width = 7.0;
    int mg_horizon = 30;
    double mg_action_cost = 0.05;
    double mg_goal_radius = 0.5;
    double mg_start_std = 0.5;

    void validate() const; // ConfigError on out-of-range values
    MultiGoalSpec multigoal_spec() const;
};

// Apply one key=value assignment; unknown key or bad value -> ConfigError.
void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value);

// Plain-text config: one key=value per line, '#' comments, blank lines ok.
TrainConfig parse_config_file(const std::string& path);

// Canonical echo of every key, one per line, sorted by key.
std::string config_echo(const TrainConfig& cfg);

} // namespace dacer
