#include "dacer/policy.hpp"

#include <cmath>
#include <string>

#include "dacer/errors.hpp"

namespace dacer {

DiffusionPolicy::DiffusionPolicy(int state_dim, int action_dim, const std::vector<int>& hidden,
                                 int T, int embed_dim, bool final_step_noise, Rng& init_rng)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      embed_dim_(embed_dim),
      final_step_noise_(final_step_noise),
      schedule_(make_schedule(T)) {
    if (state_dim < 1 || action_dim < 1) throw ConfigError("policy: dims must be positive");
    std::vector<int> dims;
    dims.push_back(state_dim + action_dim + embed_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(action_dim);
    net_ = Mlp(dims, Activation::Mish, init_rng);
}

Tensor DiffusionPolicy::predict_noise(const Tensor& states, const Tensor& noisy_actions,
                                      int t) const {
    if (states.shape.size() != 2 || states.shape[1] != state_dim_)
        throw DimensionError("predict_noise: states " + states.shape_str());
    if (noisy_actions.shape.size() != 2 || noisy_actions.shape[1] != action_dim_ ||
        noisy_actions.shape[0] != states.shape[0])
        throw DimensionError("predict_noise: actions " + noisy_actions.shape_str());
    Tensor emb = sinusoidal_embed_rows(t, embed_dim_, states.shape[0]);
    return net_.forward(concat_cols({states, noisy_actions, emb}));
}

Tensor DiffusionPolicy::posterior_mean(const Tensor& states, const Tensor& a_t, int t) const {
    const double beta = schedule_.beta(t); // also validates 1 <= t <= T
    const double alpha = schedule_.alpha(t);
    const double alpha_bar = schedule_.alpha_bar(t);
    Tensor eps = predict_noise(states, a_t, t);
    const double eps_coef = beta / std::sqrt(1.0 - alpha_bar);
    return scale(sub(a_t, scale(eps, eps_coef)), 1.0 / std::sqrt(alpha));
}

ChainNoise DiffusionPolicy::draw_chain_noise(int batch, Rng& rng) const {
    if (batch < 1) throw ContractError("draw_chain_noise: batch must be >= 1");
    ChainNoise noise;
    noise.a_T = Tensor({batch, action_dim_});
    for (int64_t i = 0; i < noise.a_T.numel(); ++i) noise.a_T.at(i) = rng.normal();
    const int last_noisy_t = final_step_noise_ ? 1 : 2;
    for (int t = schedule_.T(); t >= last_noisy_t; --t) {
        Tensor eps({batch, action_dim_});
        for (int64_t i = 0; i < eps.numel(); ++i) eps.at(i) = rng.normal();
        noise.step_eps.push_back(std::move(eps));
    }
    return noise;
}

PolicyOutput DiffusionPolicy::denoise(const Tensor& states, const ChainNoise& noise) const {
    const int B = states.rows();
    if (noise.a_T.shape != std::vector<int>{B, action_dim_})
        throw DimensionError("denoise: a_T " + noise.a_T.shape_str() + " does not match batch");
    const int last_noisy_t = final_step_noise_ ? 1 : 2;
    const size_t needed = static_cast<size_t>(schedule_.T() - last_noisy_t + 1);
    if (noise.step_eps.size() != needed)
        throw ContractError("denoise: expected " + std::to_string(needed) +
                            " step noise tensors, got " + std::to_string(noise.step_eps.size()));

    Tensor a = noise.a_T;
    size_t eps_idx = 0;
    for (int t = schedule_.T(); t >= 1; --t) {
        Tensor mu = posterior_mean(states, a, t);
        if (t >= last_noisy_t) {
            // Pre-scaled constant noise; built off-tape on purpose so the tape
            // holds only differentiable structure.
            const Tensor& eps = noise.step_eps[eps_idx++];
            Tensor scaled(eps.shape);
            const double sd = std::sqrt(schedule_.beta(t));
            for (int64_t i = 0; i < eps.numel(); ++i) scaled.at(i) = sd * eps.at(i);
            a = add(mu, scaled);
        } else {
            a = mu;
        }
        if (!a.all_finite())
            throw NumericFault("denoise: non-finite intermediate at step t=" + std::to_string(t));
    }

    PolicyOutput out;
    out.pre_clip = a;
    out.action = clamp(a, -1.0, 1.0);
    return out;
}

PolicyOutput DiffusionPolicy::sample_action(const Tensor& states, Rng& rng) const {
    return denoise(states, draw_chain_noise(states.rows(), rng));
}

void DiffusionPolicy::sample_actions_plain(const std::vector<double>& state, int n, Rng& rng,
                                           std::vector<double>& out_actions) const {
    if (static_cast<int>(state.size()) != state_dim_)
        throw DimensionError("sample_actions_plain: state size " + std::to_string(state.size()));
    if (n < 1) throw ContractError("sample_actions_plain: n must be >= 1");
    NoGrad guard;
    Tensor states({n, state_dim_});
    for (int r = 0; r < n; ++r)
        std::copy(state.begin(), state.end(),
                  states.data->data() + static_cast<size_t>(r) * state_dim_);
    PolicyOutput out = sample_action(states, rng);
    out_actions.assign(out.action.data->begin(), out.action.data->end());
}

std::vector<double> DiffusionPolicy::act(const std::vector<double>& state, Rng& rng) const {
    std::vector<double> action;
    sample_actions_plain(state, 1, rng, action);
    return action;
}

Tensor policy_loss(const DiffusionPolicy& policy, const Tensor& states, const QPairFn& q_pair,
                   Rng& rng) {
    if (states.shape.size() != 2 || states.shape[0] < 1)
        throw ContractError("policy_loss: states batch must be non-empty and 2-D");
    PolicyOutput out = policy.sample_action(states, rng);
    auto [q1, q2] = q_pair(states, out.action);
    if (q1.shape != std::vector<int>{states.shape[0], 1} || !same_shape(q1, q2))
        throw DimensionError("policy_loss: q heads must both be [B,1]");
    return neg(mean(minimum(q1, q2)));
}

} // namespace dacer
