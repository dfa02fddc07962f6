#pragma once

#include <string>
#include <vector>

#include "dacer/rng.hpp"
#include "dacer/tensor.hpp"

namespace dacer {

// How the exploration-noise magnitude alpha evolves over training:
//   Adaptive    - regulated toward a target entropy (the full algorithm)
//   Fixed       - constant alpha
//   LinearDecay - interpolates decay_from -> decay_to over training progress
//   None        - regulator removed entirely: no exploration noise is injected
//                 (the ablation baseline; alpha itself is left untouched)
enum class NoiseMode { Adaptive, Fixed, LinearDecay, None };

NoiseMode parse_noise_mode(const std::string& s);
std::string to_string(NoiseMode m);

struct AlphaState {
    double alpha = 0.27;          // noise magnitude, >= 0
    double lr = 0.03;             // regulator step size
    double target_entropy = -1.8; // nats
    double lambda = 0.1;          // noise scale multiplier
    NoiseMode mode = NoiseMode::Adaptive;
    double decay_from = 0.27;
    double decay_to = 0.1;
};

// One regulator step: alpha <- max(0, alpha - lr * (entropy - target)).
// Only Adaptive mode changes alpha; other modes return it untouched.
// Non-finite entropy -> NumericFault, state unchanged.
void update_alpha(AlphaState& state, double entropy_estimate);

// LinearDecay positioning; progress in [0,1] is clamped.
void apply_linear_decay(AlphaState& state, double progress);

// Training mode adds clip(a + lambda * alpha * N(0,I), -1, 1) in place;
// eval mode and None mode leave the action untouched.
void apply_exploration_noise(std::vector<double>& action, const AlphaState& state, Rng& rng,
                             bool eval_mode);
// Batched variant over a [B,d] tensor's values.
void apply_exploration_noise(Tensor& actions, const AlphaState& state, Rng& rng, bool eval_mode);

} // namespace dacer
