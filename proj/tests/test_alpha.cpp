#include "doctest.h"

#include <cmath>
#include <limits>

#include "dacer/alpha.hpp"
#include "dacer/errors.hpp"
#include "dacer/tensor.hpp"

using namespace dacer;

TEST_SUITE("alpha") {

TEST_CASE("mode names parse both ways") {
    CHECK(parse_noise_mode("adaptive") == NoiseMode::Adaptive);
    CHECK(parse_noise_mode("fixed") == NoiseMode::Fixed);
    CHECK(parse_noise_mode("linear") == NoiseMode::LinearDecay);
    CHECK(parse_noise_mode("none") == NoiseMode::None);
    CHECK_THROWS_AS(parse_noise_mode("drunk"), ConfigError);
    CHECK(to_string(NoiseMode::LinearDecay) == "linear");
}

TEST_CASE("the worked regulator update reproduces exactly") {
    AlphaState st;
    st.alpha = 0.27;
    st.lr = 0.03;
    st.target_entropy = -1.8;
    update_alpha(st, -2.0);
    // 0.27 - 0.03 * (-2.0 - (-1.8)) = 0.27 + 0.006
    CHECK(st.alpha == doctest::Approx(0.276).epsilon(1e-15));
}

TEST_CASE("estimated entropy above target shrinks alpha; below target grows it") {
    AlphaState st;
    st.alpha = 0.2;
    st.lr = 0.01;
    st.target_entropy = -1.0;

    double prev = st.alpha;
    for (int i = 0; i < 5; ++i) {
        update_alpha(st, -0.5); // entropy too high -> less noise
        CHECK(st.alpha < prev);
        prev = st.alpha;
    }
    for (int i = 0; i < 5; ++i) {
        update_alpha(st, -1.5); // entropy too low -> more noise
        CHECK(st.alpha > prev);
        prev = st.alpha;
    }
}

TEST_CASE("alpha is floored at zero") {
    AlphaState st;
    st.alpha = 0.01;
    st.lr = 1.0;
    st.target_entropy = -1.0;
    update_alpha(st, 5.0);
    CHECK(st.alpha == 0.0);
    update_alpha(st, 5.0);
    CHECK(st.alpha == 0.0);
}

TEST_CASE("non-finite entropy estimate faults without touching state") {
    AlphaState st;
    st.alpha = 0.27;
    CHECK_THROWS_AS(update_alpha(st, std::nan("")), NumericFault);
    CHECK_THROWS_AS(update_alpha(st, std::numeric_limits<double>::infinity()), NumericFault);
    CHECK(st.alpha == 0.27);
}

TEST_CASE("only adaptive mode responds to the regulator") {
    for (NoiseMode m : {NoiseMode::Fixed, NoiseMode::LinearDecay, NoiseMode::None}) {
        AlphaState st;
        st.mode = m;
        st.alpha = 0.1;
        update_alpha(st, -99.0);
        CHECK(st.alpha == 0.1);
    }
}

TEST_CASE("linear decay interpolates and clamps progress") {
    AlphaState st;
    st.mode = NoiseMode::LinearDecay;
    st.decay_from = 0.27;
    st.decay_to = 0.1;
    apply_linear_decay(st, 0.0);
    CHECK(st.alpha == doctest::Approx(0.27));
    apply_linear_decay(st, 0.5);
    CHECK(st.alpha == doctest::Approx(0.185));
    apply_linear_decay(st, 1.0);
    CHECK(st.alpha == doctest::Approx(0.1));
    apply_linear_decay(st, 7.0);
    CHECK(st.alpha == doctest::Approx(0.1));

    AlphaState fixed;
    fixed.mode = NoiseMode::Fixed;
    fixed.alpha = 0.4;
    apply_linear_decay(fixed, 0.9); // other modes ignore it
    CHECK(fixed.alpha == 0.4);
}

TEST_CASE("exploration noise perturbs, clips, and respects eval mode") {
    AlphaState st;
    st.alpha = 0.5;
    st.lambda = 0.1;

    Rng rng(3);
    std::vector<double> a = {0.2, -0.9};
    std::vector<double> orig = a;
    apply_exploration_noise(a, st, rng, /*eval_mode=*/true);
    CHECK(a == orig); // evaluation adds nothing

    bool changed = false;
    for (int i = 0; i < 50; ++i) {
        a = orig;
        apply_exploration_noise(a, st, rng, false);
        for (double v : a) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        changed = changed || a != orig;
    }
    CHECK(changed);
}

TEST_CASE("none mode and zero alpha leave actions untouched in training mode") {
    Rng rng(5);
    AlphaState none;
    none.mode = NoiseMode::None;
    none.alpha = 0.5;
    std::vector<double> a = {0.3, -0.3};
    apply_exploration_noise(a, none, rng, false);
    CHECK(a == std::vector<double> {0.3, -0.3});

    AlphaState zero;
    zero.alpha = 0.0;
    zero.lambda = 0.1;
    a = {0.3, -0.3};
    apply_exploration_noise(a, zero, rng, false);
    CHECK(a == std::vector<double> {0.3, -0.3});
}

TEST_CASE("tensor variant matches the vector variant draw-for-draw") {
    AlphaState st;
    st.alpha = 0.3;
    st.lambda = 0.2;
    Rng r1(9), r2(9);
    std::vector<double> v = {0.1, 0.5, -0.7, 0.0};
    Tensor t({2, 2}, {0.1, 0.5, -0.7, 0.0});
    apply_exploration_noise(v, st, r1, false);
    apply_exploration_noise(t, st, r2, false);
    for (int64_t i = 0; i < 4; ++i) CHECK(t.at(i) == v[static_cast<size_t>(i)]);
}

} // TEST_SUITE
