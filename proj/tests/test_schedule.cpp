#include "doctest.h"

#include <cmath>

#include "dacer/errors.hpp"
#include "dacer/schedule.hpp"

using namespace dacer;

TEST_SUITE("schedule") {

TEST_CASE("definitional identities hold for every step") {
    DiffusionSchedule s = make_schedule(20);
    CHECK(s.T() == 20);
    double running = 1.0;
    for (int t = 1; t <= 20; ++t) {
        CHECK(s.beta(t) > 0.0);
        CHECK(s.beta(t) < 1.0);
        CHECK(s.alpha(t) == doctest::Approx(1.0 - s.beta(t)).epsilon(1e-15));
        running *= s.alpha(t);
        CHECK(s.alpha_bar(t) == doctest::Approx(running).epsilon(1e-14));
    }
    CHECK(s.alpha_bar(1) == doctest::Approx(s.alpha(1)).epsilon(1e-15));
}

TEST_CASE("discretization matches frozen reference values at T=20") {
    DiffusionSchedule s = make_schedule(20);
    CHECK(s.beta(1) == doctest::Approx(0.017224925128178231663).epsilon(1e-14));
    CHECK(s.beta(10) == doctest::Approx(0.21347046127080580113).epsilon(1e-14));
    CHECK(s.beta(20) == doctest::Approx(0.38591688896286606746).epsilon(1e-14));
}

TEST_CASE("terminal signal destruction: cumulative product small and monotone") {
    for (int T : {10, 20, 30}) {
        CAPTURE(T);
        DiffusionSchedule s = make_schedule(T);
        CHECK(s.alpha_bar(T) < 0.01);
        // This discretization lands on the same terminal mass for every T.
        CHECK(s.alpha_bar(T) == doctest::Approx(0.0064093334462563818481).epsilon(1e-12));
        for (int t = 2; t <= T; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    }
}

TEST_CASE("bounds and bad input") {
    DiffusionSchedule s = make_schedule(5);
    CHECK_THROWS_AS(s.beta(0), ContractError);
    CHECK_THROWS_AS(s.beta(6), ContractError);
    CHECK_THROWS_AS(s.alpha_bar(0), ContractError);
    CHECK_THROWS_AS(make_schedule(0), ConfigError);
    CHECK_THROWS_AS(make_schedule(-3), ConfigError);
}

TEST_CASE("custom beta sequences are validated") {
    CHECK_THROWS_AS(DiffusionSchedule(2, {0.5, 1.0}), ContractError);
    CHECK_THROWS_AS(DiffusionSchedule(2, {0.0, 0.5}), ContractError);
    CHECK_THROWS_AS(DiffusionSchedule(2, {0.5}), ContractError);
    DiffusionSchedule ok(2, {0.25, 0.5});
    CHECK(ok.alpha_bar(2) == doctest::Approx(0.375).epsilon(1e-15));
}

} // TEST_SUITE
