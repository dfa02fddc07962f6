#include "doctest.h"

#include <cmath>

#include "dacer/envs.hpp"
#include "dacer/errors.hpp"
#include "dacer/eval.hpp"
#include "dacer/metrics.hpp"
#include "dacer/policy.hpp"
#include "test_helpers.hpp"

using namespace dacer;

TEST_SUITE("eval") {

TEST_CASE("final metric is the best value in the last tenth of training") {
    RunMetrics m;
    m.append(50, "eval_return", 100.0); // far outside the window
    m.append(90, "eval_return", 1000.0); // boundary: not strictly inside
    m.append(91, "eval_return", 5.0);
    m.append(95, "eval_return", 7.0);
    m.append(99, "eval_return", 6.0);
    CHECK(final_metric(m, 100) == 7.0);

    // Rows at or below the cutoff never contribute.
    RunMetrics boundary;
    boundary.append(90, "eval_return", 1000.0);
    CHECK_THROWS_AS(final_metric(boundary, 100), ContractError);

    // A monotone tail reports its endpoint.
    RunMetrics mono;
    for (int i = 1; i <= 10; ++i) mono.append(i * 10, "eval_return", i * 1.0);
    CHECK(final_metric(mono, 100) == 10.0);
}

TEST_CASE("final metric contract checks") {
    RunMetrics m;
    m.append(99, "eval_return", 1.0);
    CHECK_THROWS_AS(final_metric(m, 0), ContractError);
    CHECK_THROWS_AS(final_metric(m, -5), ContractError);
    CHECK_THROWS_AS(final_metric(m, 1000), ContractError); // window empty
    CHECK_THROWS_AS(final_metric(m, 100, "train_return"), ContractError);
    CHECK(final_metric(m, 100) == 1.0);

    // Other metrics in the stream are invisible to the query.
    m.append(100, "train_return", 50.0);
    CHECK(final_metric(m, 100) == 1.0);
}

TEST_CASE("aggregation over seeds: mean and population spread") {
    auto [mean2, sd2] = aggregate_runs({7.0, 9.0});
    CHECK(mean2 == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(sd2 == doctest::Approx(1.0).epsilon(1e-15));

    auto [mean1, sd1] = aggregate_runs({5.0});
    CHECK(mean1 == 5.0);
    CHECK(sd1 == 0.0);

    auto [mean3, sd3] = aggregate_runs({1.0, 2.0, 3.0});
    CHECK(mean3 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sd3 == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));

    CHECK_THROWS_AS(aggregate_runs({}), ContractError);
}

TEST_CASE("evaluate: episode accounting and determinism") {
    Rng init(3);
    DiffusionPolicy policy(2, 2, {8}, 5, 4, false, init);
    MultiGoalEnv env;

    Rng r1(10), r2(10);
    const double a = evaluate(policy, env, 3, r1);
    const double b = evaluate(policy, env, 3, r2);
    CHECK(a == b);
    CHECK(std::isfinite(a));

    // The function-valued overload with the same machinery matches exactly.
    Rng r3(10);
    ActFn act = [&policy](const std::vector<double>& s, Rng& r) { return policy.act(s, r); };
    CHECK(evaluate(act, env, 3, r3) == a);

    Rng r4(10);
    CHECK_THROWS_AS(evaluate(policy, env, 0, r4), ContractError);
    CHECK_THROWS_AS(evaluate(policy, env, -1, r4), ContractError);
}

TEST_CASE("evaluate: single fixed-action episode returns the raw reward") {
    BimodalBanditEnv env;
    ActFn constant = [](const std::vector<double>&, Rng&) {
        return std::vector<double> {0.6};
    };
    Rng rng(1);
    CHECK(evaluate(constant, env, 1, rng) ==
          doctest::Approx(BimodalBanditEnv::reward(0.6)).epsilon(1e-15));
    CHECK(evaluate(constant, env, 7, rng) ==
          doctest::Approx(BimodalBanditEnv::reward(0.6)).epsilon(1e-15));
}

TEST_CASE("evaluate: uniform actions on the two-peak bandit match the integral") {
    // E[r] and sd(r) for a ~ U(-1,1), frozen from the closed-form integrals.
    const double kMean = 0.25065488866007289279;
    const double kSd = 0.33825657497680543769;
    const int episodes = 20000;

    BimodalBanditEnv env;
    ActFn uniform = [](const std::vector<double>&, Rng& r) {
        return std::vector<double> {r.uniform(-1.0, 1.0)};
    };
    Rng rng(77);
    const double got = evaluate(uniform, env, episodes, rng);
    CHECK(std::abs(got - kMean) < 3.0 * kSd / std::sqrt(double(episodes)));
}

TEST_CASE("evaluate: horizon-limited episodes accumulate every step") {
    // Wrap the plane so every reset and step is visible to the test.
    struct CountingEnv : Env {
        MultiGoalEnv inner;
        int resets = 0;
        int64_t steps = 0;
        std::vector<std::vector<double>> starts;
        explicit CountingEnv(MultiGoalSpec spec) : inner(spec) {}
        int state_dim() const override { return inner.state_dim(); }
        int action_dim() const override { return inner.action_dim(); }
        std::vector<double> reset(Rng& rng) override {
            ++resets;
            auto s = inner.reset(rng);
            starts.push_back(s);
            return s;
        }
        std::vector<double> reset_at(const std::vector<double>& start) override {
            return inner.reset_at(start);
        }
        EnvStep step(const std::vector<double>& a) override {
            ++steps;
            return inner.step(a);
        }
        std::string name() const override { return inner.name(); }
    };

    MultiGoalSpec spec;
    spec.horizon = 4;
    CountingEnv env(spec);
    // Standing still: the position, hence the per-step reward, never changes,
    // so each episode returns -horizon * distance(start to nearest goal).
    ActFn freeze = [](const std::vector<double>&, Rng&) {
        return std::vector<double> {0.0, 0.0};
    };
    Rng rng(5);
    const int episodes = 5;
    const double ret = evaluate(freeze, env, episodes, rng);
    CHECK(env.resets == episodes);
    CHECK(env.steps == episodes * spec.horizon); // every episode runs to the horizon
    double expected = 0.0;
    for (const auto& s : env.starts)
        expected += -spec.horizon * env.inner.nearest_goal_distance(s[0], s[1]);
    expected /= episodes;
    CHECK(ret == doctest::Approx(expected).epsilon(1e-12));
}

} // TEST_SUITE
