#pragma once

#include <vector>

#include "dacer/nn.hpp"
#include "dacer/rng.hpp"
#include "dacer/tensor.hpp"

namespace dacer {

// Twin Q-networks plus their slowly-tracking target copies. Each net maps
// concat(state, action) -> scalar through a GeLU MLP. Targets start as exact
// copies of the online nets and change only through soft_update.
class CriticPair {
  public:
    CriticPair(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& init_rng);

    Tensor q1(const Tensor& states, const Tensor& actions) const;
    Tensor q2(const Tensor& states, const Tensor& actions) const;
    Tensor q1_target(const Tensor& states, const Tensor& actions) const;
    Tensor q2_target(const Tensor& states, const Tensor& actions) const;

    // phi' <- retention * phi' + (1 - retention) * phi, elementwise.
    // retention = 1 leaves targets unchanged; retention = 0 copies online nets.
    void soft_update(double retention);

    std::vector<Tensor*> online_params();

    Mlp& online1() { return online1_; }
    Mlp& online2() { return online2_; }
    Mlp& target1() { return target1_; }
    Mlp& target2() { return target2_; }
    const Mlp& online1() const { return online1_; }
    const Mlp& online2() const { return online2_; }
    const Mlp& target1() const { return target1_; }
    const Mlp& target2() const { return target2_; }

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }

  private:
    Tensor eval_net(const Mlp& net, const Tensor& states, const Tensor& actions) const;

    int state_dim_, action_dim_;
    Mlp online1_, online2_, target1_, target2_;
};

// y_i = r_i + gamma * (1 - done_i) * min(q1t_i, q2t_i), plain arithmetic shared
// by the network path and the tabular tests. Non-finite output -> NumericFault.
std::vector<double> bellman_target_values(const std::vector<double>& rewards,
                                          const std::vector<double>& done, double gamma,
                                          const std::vector<double>& q1_target,
                                          const std::vector<double>& q2_target);

// mean_B [ (y - Q1(s,a))^2 + (y - Q2(s,a))^2 ]; y must be off-tape.
Tensor critic_loss(const CriticPair& critics, const Tensor& states, const Tensor& actions,
                   const Tensor& y);

} // namespace dacer
