#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "dacer/envs.hpp"
#include "dacer/metrics.hpp"
#include "dacer/policy.hpp"
#include "dacer/rng.hpp"

namespace dacer {

// Anything that maps a state to an action draw.
using ActFn = std::function<std::vector<double>(const std::vector<double>& state, Rng& rng)>;

// Mean undiscounted, unscaled episode return of the policy run without
// exploration noise. episodes must be positive.
double evaluate(const DiffusionPolicy& policy, Env& env, int episodes, Rng& rng);
double evaluate(const ActFn& act, Env& env, int episodes, Rng& rng);

// Headline number for one finished run: the best evaluation return observed
// in the last tenth of training (rows of `metric` with iteration strictly
// greater than 0.9 * total_iters). Throws ContractError if that window holds
// no rows.
double final_metric(const RunMetrics& metrics, int64_t total_iters,
                    const std::string& metric = "eval_return");

// Mean and population standard deviation across per-seed headline numbers.
std::pair<double, double> aggregate_runs(const std::vector<double>& per_seed);

} // namespace dacer
