#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dacer/alpha.hpp"
#include "dacer/config.hpp"
#include "dacer/critic.hpp"
#include "dacer/envs.hpp"
#include "dacer/metrics.hpp"
#include "dacer/policy.hpp"
#include "dacer/replay.hpp"

namespace dacer {

// The learned state: diffusion policy, twin critics with targets, and the
// exploration-noise regulator.
struct Agent {
    Agent(const TrainConfig& cfg, int state_dim, int action_dim, Rng& init_rng);

    DiffusionPolicy policy;
    CriticPair critics;
    AlphaState alpha;
    int state_dim;
    int action_dim;

    // One value-only action sample for a single state (no exploration noise).
    std::vector<double> act(const std::vector<double>& state, Rng& rng) const;

    void save(const std::string& path, const TrainConfig& cfg, int64_t step) const;
};

// A stored agent file reconstructed: the agent plus the configuration and step
// counter it was saved with.
struct LoadedAgent {
    Agent agent;
    TrainConfig cfg;
    int64_t step = 0;
};
LoadedAgent load_agent(const std::string& path);

struct TrainResult {
    RunMetrics metrics;
    std::string run_dir;
    std::string checkpoint_path; // final checkpoint
    int64_t steps_completed = 0;
    int64_t critic_updates = 0;
    int64_t policy_updates = 0;
    int64_t alpha_updates = 0;
    double final_alpha = 0.0;
    // The replay memory as it stood at the end (stored rewards are scaled).
    std::shared_ptr<ReplayBuffer> buffer;
};

// Directory this run writes into: cfg.out_dir if set, otherwise
// runs/<env>_s<seed>_<timestamp>. Created if missing.
std::string make_run_dir(const TrainConfig& cfg);

// The full training loop: interact, store (scaled reward), and after warm-up
// update the critics every step, the policy every policy_delay steps, and the
// regulator every alpha_delay steps; targets blend toward the online nets
// after every update step. Evaluations, checkpoints, and the metrics stream
// land under the run directory. An environment fault or a diverging loss
// aborts the run with an emergency checkpoint and the offending step recorded.
TrainResult train(const TrainConfig& cfg);
TrainResult train_with_env(const TrainConfig& cfg, Env& train_env, Env& eval_env);

} // namespace dacer
