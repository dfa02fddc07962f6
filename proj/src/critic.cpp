#include "dacer/critic.hpp"

#include <cmath>
#include <string>

#include "dacer/errors.hpp"

namespace dacer {

CriticPair::CriticPair(int state_dim, int action_dim, const std::vector<int>& hidden,
                       Rng& init_rng)
    : state_dim_(state_dim), action_dim_(action_dim) {
    std::vector<int> dims;
    dims.push_back(state_dim + action_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    online1_ = Mlp(dims, Activation::GeLU, init_rng);
    online2_ = Mlp(dims, Activation::GeLU, init_rng);
    target1_ = Mlp(dims, Activation::GeLU, init_rng);
    target2_ = Mlp(dims, Activation::GeLU, init_rng);
    target1_.copy_params_from(online1_);
    target2_.copy_params_from(online2_);
}

Tensor CriticPair::eval_net(const Mlp& net, const Tensor& states, const Tensor& actions) const {
    if (states.shape.size() != 2 || states.shape[1] != state_dim_)
        throw DimensionError("critic: states " + states.shape_str());
    if (actions.shape.size() != 2 || actions.shape[1] != action_dim_ ||
        actions.shape[0] != states.shape[0])
        throw DimensionError("critic: actions " + actions.shape_str());
    return net.forward(concat_cols({states, actions}));
}

Tensor CriticPair::q1(const Tensor& s, const Tensor& a) const { return eval_net(online1_, s, a); }
Tensor CriticPair::q2(const Tensor& s, const Tensor& a) const { return eval_net(online2_, s, a); }
Tensor CriticPair::q1_target(const Tensor& s, const Tensor& a) const { return eval_net(target1_, s, a); }
Tensor CriticPair::q2_target(const Tensor& s, const Tensor& a) const { return eval_net(target2_, s, a); }

void CriticPair::soft_update(double retention) {
    if (!(retention >= 0.0 && retention <= 1.0))
        throw ContractError("soft_update: retention must lie in [0,1]");
    auto blend = [retention](Mlp& target, Mlp& online) {
        auto tp = target.params();
        auto op = online.params();
        for (size_t i = 0; i < tp.size(); ++i) {
            auto& t = *tp[i]->data;
            const auto& o = *op[i]->data;
            for (size_t j = 0; j < t.size(); ++j)
                t[j] = retention * t[j] + (1.0 - retention) * o[j];
        }
    };
    blend(target1_, online1_);
    blend(target2_, online2_);
}

std::vector<Tensor*> CriticPair::online_params() {
    std::vector<Tensor*> ps = online1_.params();
    auto p2 = online2_.params();
    ps.insert(ps.end(), p2.begin(), p2.end());
    return ps;
}

std::vector<double> bellman_target_values(const std::vector<double>& rewards,
                                          const std::vector<double>& done, double gamma,
                                          const std::vector<double>& q1_target,
                                          const std::vector<double>& q2_target) {
    const size_t n = rewards.size();
    if (done.size() != n || q1_target.size() != n || q2_target.size() != n)
        throw ContractError("bellman_target_values: array lengths differ");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("bellman_target_values: gamma must lie in [0,1)");
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) {
        y[i] = rewards[i] + gamma * (1.0 - done[i]) * std::min(q1_target[i], q2_target[i]);
        if (!std::isfinite(y[i]))
            throw NumericFault("bellman_target_values: non-finite target at index " +
                               std::to_string(i));
    }
    return y;
}

Tensor critic_loss(const CriticPair& critics, const Tensor& states, const Tensor& actions,
                   const Tensor& y) {
    if (states.shape.size() != 2 || states.shape[0] < 1)
        throw ContractError("critic_loss: empty batch");
    if (y.shape != std::vector<int>{states.shape[0], 1})
        throw DimensionError("critic_loss: y must be [B,1], got " + y.shape_str());
    if (y.on_tape())
        throw ContractError("critic_loss: targets must be detached");
    Tensor e1 = square(sub(y, critics.q1(states, actions)));
    Tensor e2 = square(sub(y, critics.q2(states, actions)));
    return mean(add(e1, e2));
}

} // namespace dacer
