#include "dacer/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dacer/errors.hpp"

namespace dacer {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kCollapseWeight = 1e-8;

// Lower-triangular Cholesky of a d x d row-major matrix. Returns false if the
// matrix is not positive definite.
bool cholesky(const std::vector<double>& A, int d, std::vector<double>& L) {
    L.assign(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = A[static_cast<size_t>(i) * d + j];
            for (int k = 0; k < j; ++k)
                s -= L[static_cast<size_t>(i) * d + k] * L[static_cast<size_t>(j) * d + k];
            if (i == j) {
                if (s <= 0.0) return false;
                L[static_cast<size_t>(i) * d + i] = std::sqrt(s);
            } else {
                L[static_cast<size_t>(i) * d + j] = s / L[static_cast<size_t>(j) * d + j];
            }
        }
    }
    return true;
}

// Per-component quantities the E-step needs: Cholesky factor and log-det.
struct CompFactor {
    std::vector<double> L;
    double log_det = 0.0; // log det(Sigma)
};

CompFactor factor_component(const std::vector<double>& sigma, int d, int k) {
    CompFactor f;
    if (!cholesky(sigma, d, f.L))
        throw NumericFault("gmm: covariance of component " + std::to_string(k) +
                           " is not positive definite");
    for (int i = 0; i < d; ++i) f.log_det += 2.0 * std::log(f.L[static_cast<size_t>(i) * d + i]);
    return f;
}

// log N(x | mu, Sigma) using the prepared factor.
double log_gaussian(const double* x, const std::vector<double>& mu, const CompFactor& f, int d,
                    std::vector<double>& scratch) {
    scratch.resize(static_cast<size_t>(d));
    // Solve L y = (x - mu) by forward substitution; quad form = |y|^2.
    for (int i = 0; i < d; ++i) {
        double s = x[i] - mu[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= f.L[static_cast<size_t>(i) * d + k] * scratch[static_cast<size_t>(k)];
        scratch[static_cast<size_t>(i)] = s / f.L[static_cast<size_t>(i) * d + i];
    }
    double quad = 0.0;
    for (int i = 0; i < d; ++i) quad += scratch[static_cast<size_t>(i)] * scratch[static_cast<size_t>(i)];
    return -0.5 * (d * kLog2Pi + f.log_det + quad);
}

std::vector<double> pooled_covariance(const std::vector<double>& data, int N, int d,
                                      double jitter) {
    std::vector<double> mean(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += data[static_cast<size_t>(i) * d + j];
    for (double& m : mean) m /= N;
    std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < N; ++i)
        for (int r = 0; r < d; ++r) {
            const double dr = data[static_cast<size_t>(i) * d + r] - mean[static_cast<size_t>(r)];
            for (int c = 0; c <= r; ++c)
                cov[static_cast<size_t>(r) * d + c] +=
                    dr * (data[static_cast<size_t>(i) * d + c] - mean[static_cast<size_t>(c)]);
        }
    for (int r = 0; r < d; ++r)
        for (int c = 0; c <= r; ++c) {
            cov[static_cast<size_t>(r) * d + c] /= N;
            cov[static_cast<size_t>(c) * d + r] = cov[static_cast<size_t>(r) * d + c];
        }
    for (int j = 0; j < d; ++j) cov[static_cast<size_t>(j) * d + j] += jitter;
    return cov;
}

// k-means++-style seeding: first mean uniform, then proportional to squared
// distance from the nearest seed so far.
std::vector<std::vector<double>> seed_means(const std::vector<double>& data, int N, int d, int K,
                                            Rng& rng) {
    std::vector<std::vector<double>> means;
    std::vector<double> min_d2(static_cast<size_t>(N), 0.0);
    const int first = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(N)));
    means.emplace_back(data.begin() + static_cast<size_t>(first) * d,
                       data.begin() + static_cast<size_t>(first + 1) * d);
    while (static_cast<int>(means.size()) < K) {
        double total = 0.0;
        for (int i = 0; i < N; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& m : means) {
                double s = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double diff = data[static_cast<size_t>(i) * d + j] - m[static_cast<size_t>(j)];
                    s += diff * diff;
                }
                best = std::min(best, s);
            }
            min_d2[static_cast<size_t>(i)] = best;
            total += best;
        }
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(N)));
        } else {
            double r = rng.uniform() * total;
            pick = N - 1;
            for (int i = 0; i < N; ++i) {
                r -= min_d2[static_cast<size_t>(i)];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        means.emplace_back(data.begin() + static_cast<size_t>(pick) * d,
                           data.begin() + static_cast<size_t>(pick + 1) * d);
    }
    return means;
}

} // namespace

std::vector<double> responsibilities(const GmmModel& model, const std::vector<double>& data,
                                     int N) {
    const int K = model.K, d = model.d;
    std::vector<CompFactor> factors;
    factors.reserve(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) factors.push_back(factor_component(model.sigma[static_cast<size_t>(k)], d, k));

    std::vector<double> gamma(static_cast<size_t>(N) * K);
    std::vector<double> logp(static_cast<size_t>(K));
    std::vector<double> scratch;
    for (int i = 0; i < N; ++i) {
        const double* x = data.data() + static_cast<size_t>(i) * d;
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            const double lw = model.w[static_cast<size_t>(k)] > 0.0
                                  ? std::log(model.w[static_cast<size_t>(k)])
                                  : -std::numeric_limits<double>::infinity();
            logp[static_cast<size_t>(k)] = lw + log_gaussian(x, model.mu[static_cast<size_t>(k)],
                                                             factors[static_cast<size_t>(k)], d, scratch);
            mx = std::max(mx, logp[static_cast<size_t>(k)]);
        }
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            gamma[static_cast<size_t>(i) * K + k] = std::exp(logp[static_cast<size_t>(k)] - mx);
            sum += gamma[static_cast<size_t>(i) * K + k];
        }
        for (int k = 0; k < K; ++k) gamma[static_cast<size_t>(i) * K + k] /= sum;
    }
    return gamma;
}

double mean_log_likelihood(const GmmModel& model, const std::vector<double>& data, int N) {
    const int K = model.K, d = model.d;
    std::vector<CompFactor> factors;
    factors.reserve(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) factors.push_back(factor_component(model.sigma[static_cast<size_t>(k)], d, k));
    std::vector<double> scratch;
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
        const double* x = data.data() + static_cast<size_t>(i) * d;
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> logp(static_cast<size_t>(K));
        for (int k = 0; k < K; ++k) {
            const double lw = model.w[static_cast<size_t>(k)] > 0.0
                                  ? std::log(model.w[static_cast<size_t>(k)])
                                  : -std::numeric_limits<double>::infinity();
            logp[static_cast<size_t>(k)] = lw + log_gaussian(x, model.mu[static_cast<size_t>(k)],
                                                             factors[static_cast<size_t>(k)], d, scratch);
            mx = std::max(mx, logp[static_cast<size_t>(k)]);
        }
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += std::exp(logp[static_cast<size_t>(k)] - mx);
        total += mx + std::log(s);
    }
    return total / N;
}

EmResult em_fit_traced(const std::vector<double>& data, int N, int d, int K,
                       const EmOptions& opts, Rng& rng) {
    if (d < 1) throw ContractError("em_fit: d must be >= 1");
    if (K < 1) throw ContractError("em_fit: K must be >= 1");
    if (N < K)
        throw ContractError("em_fit: need at least K samples, got N=" + std::to_string(N) +
                            " for K=" + std::to_string(K));
    if (static_cast<size_t>(N) * d != data.size())
        throw DimensionError("em_fit: data size does not match N*d");

    EmResult res;
    GmmModel& m = res.model;
    m.K = K;
    m.d = d;
    m.w.assign(static_cast<size_t>(K), 1.0 / K);
    m.mu = seed_means(data, N, d, K, rng);
    const std::vector<double> pooled = pooled_covariance(data, N, d, opts.jitter);
    m.sigma.assign(static_cast<size_t>(K), pooled);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // E-step responsibilities and the mean log-likelihood under the
        // current parameters (both from the same pass in spirit; the repeat
        // work here is irrelevant at these sizes and keeps the code obvious).
        const double ll = mean_log_likelihood(m, data, N);
        res.log_likelihood.push_back(ll);
        if (iter > 0 && std::abs(ll - prev_ll) < opts.tol) break;
        prev_ll = ll;

        const std::vector<double> gamma = responsibilities(m, data, N);

        // M-step.
        std::vector<double> Nk(static_cast<size_t>(K), 0.0);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < K; ++k) Nk[static_cast<size_t>(k)] += gamma[static_cast<size_t>(i) * K + k];

        for (int k = 0; k < K; ++k) {
            if (Nk[static_cast<size_t>(k)] / N < kCollapseWeight) {
                // Collapsed component: re-seed from a random sample.
                const int pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(N)));
                m.mu[static_cast<size_t>(k)].assign(data.begin() + static_cast<size_t>(pick) * d,
                                                    data.begin() + static_cast<size_t>(pick + 1) * d);
                m.sigma[static_cast<size_t>(k)] = pooled;
                Nk[static_cast<size_t>(k)] = 1.0;
                ++res.reseed_count;
                continue;
            }
            auto& mu = m.mu[static_cast<size_t>(k)];
            mu.assign(static_cast<size_t>(d), 0.0);
            for (int i = 0; i < N; ++i) {
                const double g = gamma[static_cast<size_t>(i) * K + k];
                for (int j = 0; j < d; ++j) mu[static_cast<size_t>(j)] += g * data[static_cast<size_t>(i) * d + j];
            }
            for (double& v : mu) v /= Nk[static_cast<size_t>(k)];

            auto& sig = m.sigma[static_cast<size_t>(k)];
            sig.assign(static_cast<size_t>(d) * d, 0.0);
            for (int i = 0; i < N; ++i) {
                const double g = gamma[static_cast<size_t>(i) * K + k];
                for (int r = 0; r < d; ++r) {
                    const double dr = data[static_cast<size_t>(i) * d + r] - mu[static_cast<size_t>(r)];
                    for (int c = 0; c <= r; ++c)
                        sig[static_cast<size_t>(r) * d + c] +=
                            g * dr * (data[static_cast<size_t>(i) * d + c] - mu[static_cast<size_t>(c)]);
                }
            }
            for (int r = 0; r < d; ++r)
                for (int c = 0; c <= r; ++c) {
                    sig[static_cast<size_t>(r) * d + c] /= Nk[static_cast<size_t>(k)];
                    sig[static_cast<size_t>(c) * d + r] = sig[static_cast<size_t>(r) * d + c];
                }
            for (int j = 0; j < d; ++j) sig[static_cast<size_t>(j) * d + j] += opts.jitter;
        }

        double wsum = 0.0;
        for (int k = 0; k < K; ++k) wsum += Nk[static_cast<size_t>(k)];
        for (int k = 0; k < K; ++k) m.w[static_cast<size_t>(k)] = Nk[static_cast<size_t>(k)] / wsum;
    }
    return res;
}

GmmModel em_fit(const std::vector<double>& data, int N, int d, int K, const EmOptions& opts,
                Rng& rng) {
    return em_fit_traced(data, N, d, K, opts, rng).model;
}

double gmm_entropy(const GmmModel& model) {
    const int d = model.d;
    double mix = 0.0, comp = 0.0;
    for (int k = 0; k < model.K; ++k) {
        const double w = model.w[static_cast<size_t>(k)];
        if (w > 0.0) mix -= w * std::log(w);
        const CompFactor f = factor_component(model.sigma[static_cast<size_t>(k)], d, k);
        comp += w * 0.5 * (d * (kLog2Pi + 1.0) + f.log_det);
    }
    return mix + comp;
}

double estimate_policy_entropy(const ActionSampler& sampler,
                               const std::vector<std::vector<double>>& states, int action_dim,
                               int N, int K, const EmOptions& opts, Rng& rng,
                               std::vector<double>* per_state) {
    if (states.empty()) throw ContractError("estimate_policy_entropy: empty state batch");
    if (N < K) throw ContractError("estimate_policy_entropy: N must be >= K");
    if (per_state) per_state->clear();
    double total = 0.0;
    std::vector<double> actions;
    for (const auto& s : states) {
        actions.clear();
        sampler(s, N, rng, actions);
        if (actions.size() != static_cast<size_t>(N) * action_dim)
            throw ContractError("estimate_policy_entropy: sampler returned wrong count");
        const GmmModel m = em_fit(actions, N, action_dim, K, opts, rng);
        const double h = gmm_entropy(m);
        if (per_state) per_state->push_back(h);
        total += h;
    }
    return total / static_cast<double>(states.size());
}

} // namespace dacer
