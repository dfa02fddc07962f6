#include "dacer/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dacer/errors.hpp"

namespace dacer {

double evaluate(const ActFn& act, Env& env, int episodes, Rng& rng) {
    if (episodes <= 0) throw ContractError("evaluate: episodes must be positive");
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        std::vector<double> state = env.reset(rng);
        double ep_return = 0.0;
        while (true) {
            std::vector<double> action = act(state, rng);
            EnvStep step = env.step(action);
            ep_return += step.reward;
            if (step.done()) break;
            state = step.state;
        }
        total += ep_return;
    }
    return total / episodes;
}

double evaluate(const DiffusionPolicy& policy, Env& env, int episodes, Rng& rng) {
    return evaluate(
        [&policy](const std::vector<double>& state, Rng& r) { return policy.act(state, r); },
        env, episodes, rng);
}

double final_metric(const RunMetrics& metrics, int64_t total_iters,
                    const std::string& metric) {
    if (total_iters <= 0) throw ContractError("final_metric: total_iters must be positive");
    const double cutoff = 0.9 * static_cast<double>(total_iters);
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const auto& [iteration, value] : metrics.series(metric)) {
        if (static_cast<double>(iteration) > cutoff) {
            best = std::max(best, value);
            found = true;
        }
    }
    if (!found) {
        throw ContractError("final_metric: no '" + metric +
                            "' rows in the last tenth of training");
    }
    return best;
}

std::pair<double, double> aggregate_runs(const std::vector<double>& per_seed) {
    if (per_seed.empty()) throw ContractError("aggregate_runs: no runs given");
    double mean = 0.0;
    for (double v : per_seed) mean += v;
    mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (double v : per_seed) var += (v - mean) * (v - mean);
    var /= static_cast<double>(per_seed.size());
    return {mean, std::sqrt(var)};
}

} // namespace dacer
