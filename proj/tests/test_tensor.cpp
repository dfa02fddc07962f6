#include "doctest.h"

#include <cmath>

#include "dacer/rng.hpp"
#include "dacer/tensor.hpp"
#include "test_helpers.hpp"

using namespace dacer;
using testutil::check_gradients;

TEST_SUITE("tensor") {

TEST_CASE("construction and shape views") {
    Tensor a({2, 3});
    CHECK(a.numel() == 6);
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 3);
    for (int64_t i = 0; i < 6; ++i) CHECK(a.at(i) == 0.0);

    Tensor b({3}, {1.0, 2.0, 3.0});
    CHECK(b.rows() == 1);
    CHECK(b.cols() == 3);
    CHECK(b.at(2) == 3.0);

    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
    CHECK(Tensor::full({2}, 7.0).at(1) == 7.0);
    CHECK(Tensor::scalar(4.0).shape == std::vector<int> {1});
}

TEST_CASE("copying aliases storage; clone copies; detach leaves the tape") {
    Tensor a({2}, {1.0, 2.0});
    Tensor alias = a;
    alias.at(0) = 9.0;
    CHECK(a.at(0) == 9.0);

    Tensor deep = a.clone();
    deep.at(0) = 1.0;
    CHECK(a.at(0) == 9.0);

    GradTape tape;
    a.requires_grad = true;
    a.ensure_grad();
    Tensor y = scale(a, 2.0);
    CHECK(y.on_tape());
    Tensor cut = y.detach();
    CHECK_FALSE(cut.on_tape());
    CHECK(cut.data == y.data); // same values, no graph membership
}

TEST_CASE("elementwise op shape mismatches throw") {
    Tensor a({2, 2});
    Tensor b({2, 3});
    CHECK_THROWS_AS(add(a, b), DimensionError);
    CHECK_THROWS_AS(sub(a, b), DimensionError);
    CHECK_THROWS_AS(mul(a, b), DimensionError);
    CHECK_THROWS_AS(minimum(a, b), DimensionError);
}

TEST_CASE("activation forward values match independent references") {
    const std::vector<double> xs = {-2.0, -0.5, 0.0, 0.3, 1.7};
    const std::vector<double> gelu_ref = {-0.045500263896358414401, -0.15426876936299344818,
                                          0.0, 0.18537342665668578306, 1.6242387133104767833};
    const std::vector<double> mish_ref = {-0.25250148269570886364, -0.22074377465172999682,
                                          0.0, 0.20800137234811502024, 1.6207680739755406289};
    Tensor x({5}, xs);
    Tensor g = gelu(x);
    Tensor m = mish(x);
    Tensor t = tanh_op(x);
    for (int i = 0; i < 5; ++i) {
        CHECK(g.at(i) == doctest::Approx(gelu_ref[i]).epsilon(1e-12));
        CHECK(m.at(i) == doctest::Approx(mish_ref[i]).epsilon(1e-12));
        CHECK(t.at(i) == doctest::Approx(std::tanh(xs[i])).epsilon(1e-12));
    }
}

TEST_CASE("mish is stable for extreme inputs") {
    Tensor x({2}, {200.0, -200.0});
    Tensor m = mish(x);
    CHECK(m.all_finite());
    CHECK(m.at(0) == doctest::Approx(200.0).epsilon(1e-12)); // softplus ~ x, tanh ~ 1
    CHECK(std::abs(m.at(1)) < 1e-50);                        // ~ x * e^x
}

TEST_CASE("reverse-mode gradients match finite differences: arithmetic chain") {
    GradTape tape;
    Tensor a({2, 2}, {0.3, -0.7, 1.2, 0.05});
    Tensor b({2, 2}, {-0.4, 0.9, 0.1, -1.1});
    Tensor c({2, 2}, {0.8, 0.2, -0.3, 0.6});
    for (Tensor* p : {&a, &b, &c}) {
        p->requires_grad = true;
        p->ensure_grad();
    }
    auto forward = [&] { return sum(mul(add(a, b), sub(square(a), c))); };
    auto report = check_gradients(
        {&a, &b, &c},
        [&] {
            for (Tensor* p : {&a, &b, &c}) p->zero_grad();
            tape.backward(forward());
        },
        [&] { return forward().at(0); });
    CHECK(report.coords_checked == 12);
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("reverse-mode gradients match finite differences: activations") {
    GradTape tape;
    Tensor x({6}, {-2.0, -0.5, -0.01, 0.02, 0.7, 1.9});
    x.requires_grad = true;
    x.ensure_grad();

    for (auto [name, fn] : std::vector<std::pair<const char*, Tensor (*)(const Tensor&)>> {
             {"tanh", tanh_op}, {"gelu", gelu}, {"mish", mish}, {"square", square}}) {
        CAPTURE(name);
        auto forward = [&] { return mean(fn(x)); };
        auto report = check_gradients(
            {&x},
            [&] {
                x.zero_grad();
                tape.backward(forward());
            },
            [&] { return forward().at(0); });
        CHECK(report.max_rel_err < 1e-6);
    }
}

TEST_CASE("minimum routes gradient to the smaller side; first argument on ties") {
    GradTape tape;
    Tensor a({3}, {1.0, 5.0, 2.0});
    Tensor b({3}, {3.0, 4.0, 2.0});
    a.requires_grad = b.requires_grad = true;
    a.ensure_grad();
    b.ensure_grad();
    tape.backward(sum(minimum(a, b)));
    CHECK((*a.grad)[0] == 1.0);
    CHECK((*b.grad)[0] == 0.0);
    CHECK((*a.grad)[1] == 0.0);
    CHECK((*b.grad)[1] == 1.0);
    CHECK((*a.grad)[2] == 1.0); // tie -> first
    CHECK((*b.grad)[2] == 0.0);
}

TEST_CASE("clamp forward and gradient convention") {
    Tensor x({4}, {-3.0, -0.5, 0.5, 3.0});
    Tensor y = clamp(x, -1.0, 1.0);
    CHECK(y.at(0) == -1.0);
    CHECK(y.at(1) == -0.5);
    CHECK(y.at(2) == 0.5);
    CHECK(y.at(3) == 1.0);

    GradTape tape;
    x.requires_grad = true;
    x.ensure_grad();
    tape.backward(sum(clamp(x, -1.0, 1.0)));
    CHECK((*x.grad)[0] == 0.0);
    CHECK((*x.grad)[1] == 1.0);
    CHECK((*x.grad)[2] == 1.0);
    CHECK((*x.grad)[3] == 0.0);

    // Exactly at the boundary the gradient is zero too (closed clip).
    Tensor z({1}, {1.0});
    z.requires_grad = true;
    z.ensure_grad();
    tape.backward(sum(clamp(z, -1.0, 1.0)));
    CHECK((*z.grad)[0] == 0.0);
}

TEST_CASE("linear layer matches finite differences in x, W, and b") {
    GradTape tape;
    Tensor x({3, 4});
    Tensor W({2, 4});
    Tensor b({2});
    Rng seed_rng(11);
    for (auto* p : {&x, &W, &b})
        for (auto& v : *p->data) v = seed_rng.uniform(-1.0, 1.0);
    for (auto* p : {&x, &W, &b}) {
        p->requires_grad = true;
        p->ensure_grad();
    }
    auto forward = [&] { return mean(square(linear(x, W, b))); };
    auto report = check_gradients(
        {&x, &W, &b},
        [&] {
            for (auto* p : {&x, &W, &b}) p->zero_grad();
            tape.backward(forward());
        },
        [&] { return forward().at(0); });
    CHECK(report.coords_checked == 12 + 8 + 2);
    CHECK(report.max_rel_err < 1e-6);

    CHECK_THROWS_AS(linear(Tensor({3, 5}), W, b), DimensionError);
}

TEST_CASE("concat_cols stitches parts and splits gradients") {
    GradTape tape;
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor b({2, 1}, {5, 6});
    a.requires_grad = b.requires_grad = true;
    a.ensure_grad();
    b.ensure_grad();
    Tensor cat = concat_cols({a, b});
    CHECK(cat.shape == std::vector<int> {2, 3});
    CHECK(cat.at(0, 2) == 5.0);
    CHECK(cat.at(1, 0) == 3.0);

    // d/dx sum(col2 only) -> ones into b, zeros into a.
    Tensor mask({2, 3}, {0, 0, 1, 0, 0, 1});
    tape.backward(sum(mul(cat, mask)));
    CHECK((*a.grad)[0] == 0.0);
    CHECK((*b.grad)[0] == 1.0);
    CHECK((*b.grad)[1] == 1.0);

    CHECK_THROWS_AS(concat_cols({Tensor({2, 2}), Tensor({3, 2})}), DimensionError);
}

TEST_CASE("reductions: shapes and values") {
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(sum(a).at(0) == 21.0);
    CHECK(mean(a).at(0) == doctest::Approx(3.5));
    Tensor rs = row_sum(a);
    CHECK(rs.shape == std::vector<int> {2, 1});
    CHECK(rs.at(0) == 6.0);
    CHECK(rs.at(1) == 15.0);
}

TEST_CASE("gradient accumulates over repeated use of the same tensor") {
    GradTape tape;
    Tensor a({2}, {1.0, 2.0});
    a.requires_grad = true;
    a.ensure_grad();
    tape.backward(sum(add(a, mul(a, a)))); // d/da (a + a^2) = 1 + 2a
    CHECK((*a.grad)[0] == doctest::Approx(3.0));
    CHECK((*a.grad)[1] == doctest::Approx(5.0));
}

TEST_CASE("tape lifecycle contracts") {
    GradTape tape;
    CHECK_THROWS_AS(GradTape(), ContractError); // one active tape at a time

    Tensor a({2}, {1.0, 2.0});
    a.requires_grad = true;
    a.ensure_grad();
    Tensor vec = add(a, a);
    CHECK_THROWS_AS(tape.backward(vec), ContractError); // non-scalar loss

    Tensor loss = sum(vec);
    uint64_t before = tape.epoch();
    tape.backward(loss);
    CHECK(tape.epoch() == before + 1);
    // The old scalar belongs to a consumed epoch now.
    CHECK_THROWS_AS(tape.backward(loss), ContractError);
    // Feeding a stale intermediate into a new op is rejected.
    CHECK_THROWS_AS(add(vec, vec), ContractError);
}

TEST_CASE("NoGrad suppresses recording") {
    GradTape tape;
    Tensor a({2}, {1.0, 2.0});
    a.requires_grad = true;
    a.ensure_grad();
    {
        NoGrad guard;
        Tensor y = mul(a, a);
        CHECK_FALSE(y.on_tape());
        CHECK(GradTape::active() == nullptr);
    }
    CHECK(tape.size() == 0);
    CHECK(GradTape::active() == &tape);
}

TEST_CASE("ops without any active tape behave as value computations") {
    Tensor a({2}, {3.0, 4.0});
    Tensor y = square(a);
    CHECK_FALSE(y.on_tape());
    CHECK(y.at(1) == 16.0);
}

TEST_CASE("all_finite flags bad values") {
    Tensor a({2}, {1.0, 2.0});
    CHECK(a.all_finite());
    a.at(0) = std::nan("");
    CHECK_FALSE(a.all_finite());
}

} // TEST_SUITE
