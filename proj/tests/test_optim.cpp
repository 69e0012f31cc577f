#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "optim.hpp"

using namespace minv;

TEST_CASE("sgd step: param 1.0, grad 2.0, lr 0.1 -> 0.8") {
    Optimizer opt({OptKind::sgd, 0.1});
    Tensor p({1}, {1.0});
    Tensor g({1}, {2.0});
    Tensor params[] = {p};
    Tensor grads[] = {g};
    opt.step(params, grads);
    CHECK(params[0][0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(opt.step_count() == 1);
}

TEST_CASE("sgd zero gradient leaves parameters unchanged") {
    Optimizer opt({OptKind::sgd, 0.5});
    Tensor params[] = {Tensor({3}, {1.0, -2.0, 3.0})};
    Tensor grads[] = {Tensor({3})};
    opt.step(params, grads);
    CHECK(params[0][0] == 1.0);
    CHECK(params[0][1] == -2.0);
    CHECK(params[0][2] == 3.0);
}

TEST_CASE("adam first step magnitude approaches lr for any constant gradient") {
    // reference: m = (1-b1)g, v = (1-b2)g^2; bias-corrected mhat = g,
    // vhat = g^2, so the update is -lr * g / (|g| + eps) ~= -lr * sign(g)
    const double lr = 0.123;
    for (double gval : {3.7, -0.004, 1e6}) {
        OptimizerConfig cfg{OptKind::adam, lr, 0.9, 0.999, 1e-15};
        Optimizer opt(cfg);
        Tensor params[] = {Tensor({1}, {0.0})};
        Tensor grads[] = {Tensor({1}, {gval})};
        opt.step(params, grads);
        const double expected = -lr * (gval > 0 ? 1.0 : -1.0);
        CHECK(params[0][0] == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("adam bias-corrected sequence matches a scalar reference computation") {
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Optimizer opt({OptKind::adam, lr, b1, b2, eps});
    Tensor params[] = {Tensor({1}, {1.0})};

    double ref_p = 1.0, m = 0.0, v = 0.0;
    const double gs[] = {0.5, -1.25, 2.0, 0.0, 0.75};
    for (int t = 0; t < 5; ++t) {
        Tensor grads[] = {Tensor({1}, {gs[t]})};
        opt.step(params, grads);

        m = b1 * m + (1 - b1) * gs[t];
        v = b2 * v + (1 - b2) * gs[t] * gs[t];
        const double mh = m / (1 - std::pow(b1, t + 1));
        const double vh = v / (1 - std::pow(b2, t + 1));
        ref_p -= lr * mh / (std::sqrt(vh) + eps);
        CHECK(params[0][0] == doctest::Approx(ref_p).epsilon(1e-14));
    }
    CHECK(opt.step_count() == 5);
}

TEST_CASE("optimizer refuses shape mismatches and non-finite gradients") {
    Optimizer opt({OptKind::sgd, 0.1});
    Tensor params[] = {Tensor({2}, {1.0, 2.0})};
    {
        Tensor grads[] = {Tensor({3})};
        CHECK_THROWS_AS(opt.step(params, grads), Error);
    }
    {
        Tensor grads[] = {Tensor({2}, {1.0, std::nan("")})};
        bool threw = false;
        try {
            opt.step(params, grads);
        } catch (const Error& e) {
            threw = true;
            CHECK(e.code() == Errc::numeric);
        }
        CHECK(threw);
        // step refused: parameters untouched
        CHECK(params[0][0] == 1.0);
        CHECK(params[0][1] == 2.0);
    }
}
