#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "dacer/rng.hpp"

namespace dacer {

struct EnvStep {
    std::vector<double> state; // next observation
    double reward = 0.0;       // unscaled
    bool terminal = false;     // true endpoint (bootstrapping stops)
    bool truncated = false;    // horizon cut (bootstrapping continues)
    double distance_to_goal = 0.0;
    int reached_goal = -1;     // index of the goal entered, -1 otherwise

    bool done() const { return terminal || truncated; }
};

class Env {
  public:
    virtual ~Env() = default;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;
    // Start from an exact point (probe rollouts). Out-of-range -> ContractError.
    virtual std::vector<double> reset_at(const std::vector<double>& start) = 0;
    virtual EnvStep step(const std::vector<double>& action) = 0;
    virtual std::string name() const = 0;
};

// 2-D point mass on a bounded plane with four symmetric goals. Dynamics
// s' = clip(s + a); reward = -distance to nearest goal - action_cost*|a|^2;
// an episode ends inside a goal radius (terminal) or at the horizon
// (truncated).
struct MultiGoalSpec {
    double half_width = 7.0;
    int horizon = 30;
    double action_cost = 0.05;
    double goal_radius = 0.5;
    double start_std = 0.5;
    std::array<std::array<double, 2>, 4> goals{{{0, 5}, {0, -5}, {5, 0}, {-5, 0}}};
};

class MultiGoalEnv : public Env {
  public:
    explicit MultiGoalEnv(MultiGoalSpec spec = {});

    int state_dim() const override { return 2; }
    int action_dim() const override { return 2; }
    std::vector<double> reset(Rng& rng) override;
    std::vector<double> reset_at(const std::vector<double>& start) override;
    EnvStep step(const std::vector<double>& action) override;
    std::string name() const override { return "multigoal"; }

    const MultiGoalSpec& spec() const { return spec_; }
    // Distance from a point to the nearest goal, and which goal that is.
    double nearest_goal_distance(double x, double y, int* index = nullptr) const;
    // Actions outside [-1,1] are clipped and counted here rather than failing.
    int64_t clipped_action_count() const { return clipped_actions_; }

  private:
    MultiGoalSpec spec_;
    std::array<double, 2> pos_{};
    int steps_in_episode_ = 0;
    bool episode_active_ = false;
    int64_t clipped_actions_ = 0;
};

// Single-step 1-D environment whose reward has two equal optima at a = +-0.6:
//   r(a) = exp(-(a-0.6)^2/0.02) + exp(-(a+0.6)^2/0.02)
// The optimal stochastic policy is bimodal, which makes mode collapse of a
// unimodal policy directly measurable.
class BimodalBanditEnv : public Env {
  public:
    int state_dim() const override { return 1; }
    int action_dim() const override { return 1; }
    std::vector<double> reset(Rng& rng) override;
    std::vector<double> reset_at(const std::vector<double>& start) override;
    EnvStep step(const std::vector<double>& action) override;
    std::string name() const override { return "bandit"; }

    static double reward(double a);

  private:
    bool episode_active_ = false;
};

std::unique_ptr<Env> make_env(const std::string& name, const MultiGoalSpec& mg_spec = {});

} // namespace dacer
