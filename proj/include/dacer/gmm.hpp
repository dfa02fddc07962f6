#pragma once

#include <functional>
#include <vector>

#include "dacer/rng.hpp"

namespace dacer {

// Full-covariance Gaussian mixture. Plain buffers, no autodiff involvement:
// entropy estimation is a measurement, not a differentiable path.
struct GmmModel {
    int K = 0;
    int d = 0;
    std::vector<double> w;                  // K mixing weights, sum 1
    std::vector<std::vector<double>> mu;    // K vectors of length d
    std::vector<std::vector<double>> sigma; // K row-major d*d covariance matrices
};

struct EmOptions {
    int max_iters = 100;
    double tol = 1e-6;     // stop when mean log-likelihood improves by less
    double jitter = 1e-6;  // added to covariance diagonals
};

struct EmResult {
    GmmModel model;
    std::vector<double> log_likelihood; // mean LL before each M-step, one per iteration
    int reseed_count = 0;               // collapsed components re-seeded
};

// Fit by expectation-maximization. Initialization: k-means++-style seeding of
// the means from the samples, equal weights, pooled (whole-data) covariance.
// data is N x d row-major. N < K -> ContractError. A component whose weight
// falls below 1e-8 is re-seeded from a random sample and counted in
// reseed_count.
EmResult em_fit_traced(const std::vector<double>& data, int N, int d, int K,
                       const EmOptions& opts, Rng& rng);
GmmModel em_fit(const std::vector<double>& data, int N, int d, int K, const EmOptions& opts,
                Rng& rng);

// Posterior component responsibilities under `model`: N x K row-major, rows
// sum to 1.
std::vector<double> responsibilities(const GmmModel& model, const std::vector<double>& data,
                                     int N);

double mean_log_likelihood(const GmmModel& model, const std::vector<double>& data, int N);

// Mixture-entropy surrogate in nats:
//   -sum_k w_k log w_k + sum_k w_k * 0.5 * log((2*pi*e)^d * det(sigma_k))
// This is an upper bound on the true mixture entropy; determinants go through
// Cholesky, and a non-positive-definite covariance raises NumericFault.
double gmm_entropy(const GmmModel& model);

// Draws n actions (n x d row-major into out) for one state.
using ActionSampler =
    std::function<void(const std::vector<double>& state, int n, Rng& rng, std::vector<double>& out)>;

// Mean over states of per-state GMM entropy: for each state draw N actions,
// fit a K-component mixture, evaluate the entropy surrogate. Optional
// per_state output receives the individual estimates.
double estimate_policy_entropy(const ActionSampler& sampler,
                               const std::vector<std::vector<double>>& states, int action_dim,
                               int N, int K, const EmOptions& opts, Rng& rng,
                               std::vector<double>* per_state = nullptr);

} // namespace dacer
