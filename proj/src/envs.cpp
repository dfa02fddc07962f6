#include "dacer/envs.hpp"

#include <algorithm>
#include <cmath>

#include "dacer/errors.hpp"

namespace dacer {

MultiGoalEnv::MultiGoalEnv(MultiGoalSpec spec) : spec_(spec) {
    if (spec_.half_width <= 0 || spec_.horizon < 1 || spec_.goal_radius <= 0)
        throw ConfigError("multigoal: bad spec constants");
}

std::vector<double> MultiGoalEnv::reset(Rng& rng) {
    const double w = spec_.half_width;
    pos_[0] = std::clamp(rng.normal(0.0, spec_.start_std), -w, w);
    pos_[1] = std::clamp(rng.normal(0.0, spec_.start_std), -w, w);
    steps_in_episode_ = 0;
    episode_active_ = true;
    return {pos_[0], pos_[1]};
}

std::vector<double> MultiGoalEnv::reset_at(const std::vector<double>& start) {
    if (start.size() != 2) throw ContractError("multigoal: start must be 2-D");
    const double w = spec_.half_width;
    if (std::abs(start[0]) > w || std::abs(start[1]) > w)
        throw ContractError("multigoal: start point outside the plane");
    pos_ = {start[0], start[1]};
    steps_in_episode_ = 0;
    episode_active_ = true;
    return {pos_[0], pos_[1]};
}

double MultiGoalEnv::nearest_goal_distance(double x, double y, int* index) const {
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (size_t i = 0; i < spec_.goals.size(); ++i) {
        const double dx = x - spec_.goals[i][0], dy = y - spec_.goals[i][1];
        const double dist = std::hypot(dx, dy);
        if (dist < best) {
            best = dist;
            best_i = static_cast<int>(i);
        }
    }
    if (index) *index = best_i;
    return best;
}

EnvStep MultiGoalEnv::step(const std::vector<double>& action) {
    if (!episode_active_)
        throw ContractError("multigoal: step after episode end; reset first");
    if (action.size() != 2) throw ContractError("multigoal: action must be 2-D");

    double ax = action[0], ay = action[1];
    if (std::abs(ax) > 1.0 || std::abs(ay) > 1.0) {
        ++clipped_actions_;
        ax = std::clamp(ax, -1.0, 1.0);
        ay = std::clamp(ay, -1.0, 1.0);
    }

    const double w = spec_.half_width;
    pos_[0] = std::clamp(pos_[0] + ax, -w, w);
    pos_[1] = std::clamp(pos_[1] + ay, -w, w);
    ++steps_in_episode_;

    EnvStep out;
    out.state = {pos_[0], pos_[1]};
    int goal_i = -1;
    const double dist = nearest_goal_distance(pos_[0], pos_[1], &goal_i);
    out.distance_to_goal = dist;
    out.reward = -dist - spec_.action_cost * (ax * ax + ay * ay);
    if (dist < spec_.goal_radius) {
        out.terminal = true;
        out.reached_goal = goal_i;
    } else if (steps_in_episode_ >= spec_.horizon) {
        out.truncated = true;
    }
    if (out.done()) episode_active_ = false;
    return out;
}

std::vector<double> BimodalBanditEnv::reset(Rng&) {
    episode_active_ = true;
    return {0.0};
}

std::vector<double> BimodalBanditEnv::reset_at(const std::vector<double>& start) {
    if (start.size() != 1 || start[0] != 0.0)
        throw ContractError("bandit: the only state is {0}");
    episode_active_ = true;
    return {0.0};
}

double BimodalBanditEnv::reward(double a) {
    const double d1 = a - 0.6, d2 = a + 0.6;
    return std::exp(-d1 * d1 / 0.02) + std::exp(-d2 * d2 / 0.02);
}

EnvStep BimodalBanditEnv::step(const std::vector<double>& action) {
    if (!episode_active_) throw ContractError("bandit: step after episode end; reset first");
    if (action.size() != 1) throw ContractError("bandit: action must be 1-D");
    const double a = std::clamp(action[0], -1.0, 1.0);
    EnvStep out;
    out.state = {0.0};
    out.reward = reward(a);
    out.terminal = true;
    episode_active_ = false;
    return out;
}

std::unique_ptr<Env> make_env(const std::string& name, const MultiGoalSpec& mg_spec) {
    if (name == "multigoal") return std::make_unique<MultiGoalEnv>(mg_spec);
    if (name == "bandit") return std::make_unique<BimodalBanditEnv>();
    throw ConfigError("unknown environment '" + name + "' (expected multigoal|bandit)");
}

} // namespace dacer
