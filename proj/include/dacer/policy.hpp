#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dacer/nn.hpp"
#include "dacer/rng.hpp"
#include "dacer/schedule.hpp"
#include "dacer/tensor.hpp"

namespace dacer {

struct PolicyOutput {
    Tensor action;   // [B,d], every coordinate in [-1,1]
    Tensor pre_clip; // [B,d], unbounded chain output
};

// Pre-drawn randomness for one denoising pass, so the same chain can be
// replayed deterministically (finite-difference checks, reproducibility).
struct ChainNoise {
    Tensor a_T;                    // [B,d] standard normal
    std::vector<Tensor> step_eps;  // standard normal per noisy step, outermost (t=T) first
};

// The policy: a noise-prediction MLP driving the T-step denoising chain.
// Sampling starts from a_T ~ N(0,I) and iterates
//   a_{t-1} = mu_theta(a_t, s, t) + sqrt(beta_t) * eps
// down to t = 1; by default no noise is added at the final step (the
// `final_step_noise` switch restores the noise-at-every-step reading). The
// result is clipped to [-1,1]^d. With a tape active the whole chain is
// recorded, so value gradients flow through every step into the net.
class DiffusionPolicy {
  public:
    DiffusionPolicy(int state_dim, int action_dim, const std::vector<int>& hidden, int T,
                    int embed_dim, bool final_step_noise, Rng& init_rng);

    // eps_theta(a_t, s, t): input is concat(state, noisy action, embed(t)).
    Tensor predict_noise(const Tensor& states, const Tensor& noisy_actions, int t) const;

    // (1/sqrt(alpha_t)) * (a_t - (beta_t/sqrt(1-alpha_bar_t)) * eps_theta(a_t,s,t))
    Tensor posterior_mean(const Tensor& states, const Tensor& a_t, int t) const;

    ChainNoise draw_chain_noise(int batch, Rng& rng) const;

    // Deterministic given `noise`; records on the active tape if one is live.
    PolicyOutput denoise(const Tensor& states, const ChainNoise& noise) const;

    PolicyOutput sample_action(const Tensor& states, Rng& rng) const;

    // Convenience: n action samples for a single state, values only (no tape),
    // written to out_actions as n*d row-major doubles. These are the policy's
    // own samples, before any exploration noise.
    void sample_actions_plain(const std::vector<double>& state, int n, Rng& rng,
                              std::vector<double>& out_actions) const;

    // One value-only action for a single state (no tape, no exploration noise).
    std::vector<double> act(const std::vector<double>& state, Rng& rng) const;

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    int embed_dim() const { return embed_dim_; }
    bool final_step_noise() const { return final_step_noise_; }
    const DiffusionSchedule& schedule() const { return schedule_; }
    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

  private:
    int state_dim_, action_dim_, embed_dim_;
    bool final_step_noise_;
    DiffusionSchedule schedule_;
    Mlp net_;
};

// Twin state-action value heads evaluated on a recorded batch: returns a pair
// of [B,1] tensors. The trainer wires this to the online critics; tests can
// substitute analytic fields.
using QPairFn =
    std::function<std::pair<Tensor, Tensor>(const Tensor& states, const Tensor& actions)>;

// -mean_B min(Q1, Q2)(s, a0) with a0 sampled through the recorded chain.
// Minimizing this pushes the chain toward high-value actions.
Tensor policy_loss(const DiffusionPolicy& policy, const Tensor& states, const QPairFn& q_pair,
                   Rng& rng);

} // namespace dacer
