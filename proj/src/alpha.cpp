#include "dacer/alpha.hpp"

#include <algorithm>
#include <cmath>

#include "dacer/errors.hpp"

namespace dacer {

NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "adaptive") return NoiseMode::Adaptive;
    if (s == "fixed") return NoiseMode::Fixed;
    if (s == "linear") return NoiseMode::LinearDecay;
    if (s == "none") return NoiseMode::None;
    throw ConfigError("unknown noise mode '" + s + "' (expected adaptive|fixed|linear|none)");
}

std::string to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::Adaptive: return "adaptive";
        case NoiseMode::Fixed: return "fixed";
        case NoiseMode::LinearDecay: return "linear";
        case NoiseMode::None: return "none";
    }
    return "?";
}

void update_alpha(AlphaState& state, double entropy_estimate) {
    if (!std::isfinite(entropy_estimate))
        throw NumericFault("update_alpha: non-finite entropy estimate, update skipped");
    if (state.mode != NoiseMode::Adaptive) return;
    state.alpha = std::max(0.0, state.alpha - state.lr * (entropy_estimate - state.target_entropy));
}

void apply_linear_decay(AlphaState& state, double progress) {
    if (state.mode != NoiseMode::LinearDecay) return;
    const double p = std::clamp(progress, 0.0, 1.0);
    state.alpha = state.decay_from + (state.decay_to - state.decay_from) * p;
}

void apply_exploration_noise(std::vector<double>& action, const AlphaState& state, Rng& rng,
                             bool eval_mode) {
    if (eval_mode || state.mode == NoiseMode::None) return;
    const double s = state.lambda * state.alpha;
    for (double& a : action) a = std::clamp(a + s * rng.normal(), -1.0, 1.0);
}

void apply_exploration_noise(Tensor& actions, const AlphaState& state, Rng& rng, bool eval_mode) {
    if (eval_mode || state.mode == NoiseMode::None) return;
    const double s = state.lambda * state.alpha;
    for (double& a : *actions.data) a = std::clamp(a + s * rng.normal(), -1.0, 1.0);
}

} // namespace dacer
