#include "doctest.h"

#include <cmath>

#include "dacer/nn.hpp"
#include "dacer/rng.hpp"
#include "test_helpers.hpp"

using namespace dacer;

TEST_SUITE("nn") {

TEST_CASE("mlp shapes, bounded fan-in init, and width checks") {
    Rng rng(3);
    Mlp net({4, 8, 8, 2}, Activation::GeLU, rng);
    CHECK(net.layer_count() == 3);
    CHECK(net.in_dim() == 4);
    CHECK(net.out_dim() == 2);

    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization stays in bounds.
    for (size_t l = 0; l < net.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims()[l]));
        for (double v : *net.weight(l).data) CHECK(std::abs(v) <= bound);
        for (double v : *net.bias(l).data) CHECK(std::abs(v) <= bound);
        CHECK(net.weight(l).requires_grad);
        CHECK(net.bias(l).requires_grad);
    }

    Tensor x({3, 4});
    CHECK(net.forward(x).shape == std::vector<int> {3, 2});
    CHECK_THROWS_AS(net.forward(Tensor({3, 5})), DimensionError);
}

TEST_CASE("zero parameters map anything to zero") {
    Rng rng(5);
    Mlp net({3, 4, 2}, Activation::Mish, rng);
    for (Tensor* p : net.params())
        for (double& v : *p->data) v = 0.0;
    Tensor x({2, 3}, {1, -2, 3, 0.5, 0.25, -1});
    Tensor y = net.forward(x);
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.at(i) == 0.0);
}

TEST_CASE("identity single layer applies no activation after the final layer") {
    Rng rng(7);
    Mlp net({3, 3}, Activation::GeLU, rng);
    for (double& v : *net.weight(0).data) v = 0.0;
    for (int i = 0; i < 3; ++i) net.weight(0).at(i, i) = 1.0;
    for (double& v : *net.bias(0).data) v = 0.0;
    Tensor x({1, 3}, {-2.0, 0.5, 3.0}); // GeLU would distort negatives
    Tensor y = net.forward(x);
    for (int i = 0; i < 3; ++i) CHECK(y.at(i) == doctest::Approx(x.at(i)).epsilon(1e-15));
}

TEST_CASE("two-layer forward matches a hand-rolled matrix oracle") {
    Rng rng(11);
    Mlp net({2, 3, 1}, Activation::GeLU, rng);
    Tensor x({1, 2}, {0.4, -0.9});

    // Straight-line reference with explicit loops.
    auto phi = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
    double h[3];
    for (int j = 0; j < 3; ++j) {
        double z = net.bias(0).at(j);
        for (int i = 0; i < 2; ++i) z += net.weight(0).at(j, i) * x.at(i);
        h[j] = z * phi(z);
    }
    double out = net.bias(1).at(0);
    for (int j = 0; j < 3; ++j) out += net.weight(1).at(0, j) * h[j];

    CHECK(net.forward(x).at(0) == doctest::Approx(out).epsilon(1e-14));
}

TEST_CASE("forward is deterministic bit-for-bit") {
    Rng rng(13);
    Mlp net({4, 6, 3}, Activation::Mish, rng);
    Tensor x({2, 4}, {0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7, -0.8});
    Tensor y1 = net.forward(x);
    Tensor y2 = net.forward(x);
    for (int64_t i = 0; i < y1.numel(); ++i) CHECK(y1.at(i) == y2.at(i));
}

TEST_CASE("mlp end-to-end gradients match finite differences") {
    Rng rng(17);
    Mlp net({3, 5, 2}, Activation::Mish, rng);
    Tensor x({4, 3});
    for (double& v : *x.data) v = rng.uniform(-1.0, 1.0);

    GradTape tape;
    auto forward = [&] { return mean(square(net.forward(x))); };
    auto report = testutil::check_gradients(
        net.params(),
        [&] {
            for (Tensor* p : net.params()) p->zero_grad();
            tape.backward(forward());
        },
        [&] { return forward().at(0); });
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("copy_params_from copies values and rejects shape mismatch") {
    Rng rng(19);
    Mlp a({2, 4, 1}, Activation::GeLU, rng);
    Mlp b({2, 4, 1}, Activation::GeLU, rng);
    b.copy_params_from(a);
    for (size_t l = 0; l < a.layer_count(); ++l) {
        CHECK(*a.weight(l).data == *b.weight(l).data);
        CHECK(a.weight(l).data != b.weight(l).data); // distinct storage
    }
    Mlp c({2, 5, 1}, Activation::GeLU, rng);
    CHECK_THROWS_AS(c.copy_params_from(a), ContractError);
}

TEST_CASE("sinusoidal embedding: zero step, determinism, direct oracle") {
    Tensor e0 = sinusoidal_embed(0, 6);
    for (int i = 0; i < 3; ++i) CHECK(e0.at(i) == 0.0);
    for (int i = 3; i < 6; ++i) CHECK(e0.at(i) == 1.0);

    Tensor a = sinusoidal_embed(12, 16);
    Tensor bvals = sinusoidal_embed(12, 16);
    for (int64_t i = 0; i < a.numel(); ++i) CHECK(a.at(i) == bvals.at(i));

    // t=1, dim=4: frequencies 10000^{-2k/4}, k = 1..2.
    Tensor e = sinusoidal_embed(1, 4);
    const double w1 = std::pow(10000.0, -0.5);
    const double w2 = std::pow(10000.0, -1.0);
    CHECK(e.at(0) == doctest::Approx(std::sin(w1)).epsilon(1e-15));
    CHECK(e.at(1) == doctest::Approx(std::sin(w2)).epsilon(1e-15));
    CHECK(e.at(2) == doctest::Approx(std::cos(w1)).epsilon(1e-15));
    CHECK(e.at(3) == doctest::Approx(std::cos(w2)).epsilon(1e-15));

    CHECK_THROWS_AS(sinusoidal_embed(1, 5), ConfigError);
    CHECK_THROWS_AS(sinusoidal_embed(1, 0), ConfigError);
    CHECK_THROWS_AS(sinusoidal_embed(-1, 4), ContractError);

    Tensor rows = sinusoidal_embed_rows(3, 8, 5);
    CHECK(rows.shape == std::vector<int> {5, 8});
    Tensor one = sinusoidal_embed(3, 8);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 8; ++c) CHECK(rows.at(r, c) == one.at(c));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    Tensor w({2}, {0.5, -0.3});
    w.requires_grad = true;
    w.ensure_grad();
    Adam opt({&w}, 0.01);
    opt.step();
    CHECK(w.at(0) == 0.5);
    CHECK(w.at(1) == -0.3);
    CHECK(opt.step_count() == 1);
}

TEST_CASE("adam: first bias-corrected step moves by about -lr for unit gradient") {
    Tensor w({1}, {0.0});
    w.requires_grad = true;
    w.ensure_grad();
    (*w.grad)[0] = 1.0;
    Adam opt({&w}, 1e-4);
    opt.step();
    CHECK(w.at(0) == doctest::Approx(-0.00009999999900000001).epsilon(1e-12));
}

TEST_CASE("adam: three identical steps match the scalar recurrence oracle") {
    Tensor w({2}, {0.5, -0.3});
    w.requires_grad = true;
    w.ensure_grad();
    Adam opt({&w}, 0.01);

    const double expected_w[3][2] = {{0.4900000009999999, -0.290000000499999975},
                                     {0.4800000019999998, -0.28000000099999995},
                                     {0.4700000029999997, -0.270000001499999925}};
    const double expected_m[3][2] = {{0.01, -0.02}, {0.019, -0.038}, {0.0271, -0.0542}};
    const double expected_v[3][2] = {{0.00001, 0.00004},
                                     {0.00001999, 0.00007996},
                                     {0.00002997001, 0.00011988004}};
    for (int t = 0; t < 3; ++t) {
        (*w.grad)[0] = 0.1;
        (*w.grad)[1] = -0.2;
        opt.step();
        for (int i = 0; i < 2; ++i) {
            CHECK(w.at(i) == doctest::Approx(expected_w[t][i]).epsilon(1e-13));
            CHECK(opt.first_moment(0)[i] == doctest::Approx(expected_m[t][i]).epsilon(1e-13));
            CHECK(opt.second_moment(0)[i] == doctest::Approx(expected_v[t][i]).epsilon(1e-13));
            CHECK(opt.second_moment(0)[i] >= 0.0);
        }
    }
    CHECK(opt.step_count() == 3);
}

TEST_CASE("adam: NaN gradient rejects the whole update") {
    Tensor w({2}, {0.5, -0.3});
    w.requires_grad = true;
    w.ensure_grad();
    Adam opt({&w}, 0.01);
    (*w.grad)[0] = std::nan("");
    (*w.grad)[1] = 0.1;
    CHECK_THROWS_AS(opt.step(), NumericFault);
    CHECK(w.at(0) == 0.5); // untouched
    CHECK(w.at(1) == -0.3);
    CHECK(opt.step_count() == 0);
    CHECK(opt.first_moment(0)[1] == 0.0); // moments untouched too
}

TEST_CASE("adam: global norm clip caps the applied gradient") {
    Tensor w({2}, {0.0, 0.0});
    w.requires_grad = true;
    w.ensure_grad();
    Adam opt({&w}, 0.01);
    opt.set_global_clip(1.0);
    (*w.grad)[0] = 30.0;
    (*w.grad)[1] = 40.0; // norm 50 -> scaled by 1/50

    // Reference: one Adam step with the clipped gradient (0.6, 0.8).
    Tensor w2({2}, {0.0, 0.0});
    w2.requires_grad = true;
    w2.ensure_grad();
    (*w2.grad)[0] = 0.6;
    (*w2.grad)[1] = 0.8;
    Adam opt2({&w2}, 0.01);
    opt.step();
    opt2.step();
    CHECK(w.at(0) == doctest::Approx(w2.at(0)).epsilon(1e-14));
    CHECK(w.at(1) == doctest::Approx(w2.at(1)).epsilon(1e-14));
}

} // TEST_SUITE
