#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "model.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "support/oracles.hpp"
#include "train.hpp"

using namespace minv;
using minv::testing::dense_solve;
using minv::testing::fd_hvp;
using minv::testing::random_spd;
using minv::testing::random_tensor;
using minv::testing::rel_err;

namespace {

// 1/2 x A x^T for a row vector x [1,n]
LossFn quadratic_loss(const Tensor& a) {
    return [a](Graph& g, Value x) {
        Value av = g.constant(a);
        Value xa = g.matmul(x, av);
        return g.scale(g.sum(g.mul(x, xa)), 0.5);
    };
}

LossFn sigmoid_mlp_loss(const Model& m, const Tensor& onehot) {
    return [&m, onehot](Graph& g, Value x) {
        GraphModel gm = bind_model(g, m, false);
        return g.softmax_ce(forward_pre_final(g, gm, m.spec, x), onehot);
    };
}

} // namespace

TEST_CASE("hvp of a quadratic form is A*v at any point") {
    Rng rng(3);
    const std::size_t n = 7;
    Tensor a = random_spd(n, rng);
    LossFn f = quadratic_loss(a);
    for (int trial = 0; trial < 3; ++trial) {
        Tensor x = random_tensor({1, n}, rng);
        Tensor v = random_tensor({1, n}, rng);
        Tensor hv = hvp(f, x, v);
        Tensor want = matmul(v, a); // A symmetric
        CHECK(rel_err(hv, want) < 1e-12);
    }
}

TEST_CASE("hvp of a linear function is zero") {
    LossFn f = [](Graph& g, Value x) { return g.sum(x); };
    Rng rng(4);
    Tensor x = random_tensor({1, 5}, rng);
    Tensor v = random_tensor({1, 5}, rng);
    Tensor hv = hvp(f, x, v);
    for (double val : hv.data()) CHECK(val == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hvp shape mismatch is rejected") {
    LossFn f = [](Graph& g, Value x) { return g.sum(x); };
    CHECK_THROWS_AS((void)hvp(f, Tensor({1, 3}), Tensor({1, 4})), Error);
}

TEST_CASE("hvp on a sigmoid MLP matches finite differences of the gradient") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {5, 12, 4}, Activation::sigmoid);
    Model m = build_model(spec, 31);
    Tensor onehot = one_hot_rows({2}, 4);
    LossFn f = sigmoid_mlp_loss(m, onehot);

    Rng rng(8);
    Tensor x = random_tensor({1, 5}, rng, -0.5, 0.5);
    Tensor v = random_tensor({1, 5}, rng);

    Tensor hv = hvp(f, x, v);
    Tensor fd = fd_hvp([&](const Tensor& p) { return loss_grad(f, p); }, x, v, 1e-4);
    CHECK(rel_err(hv, fd) < 1e-3);
}

TEST_CASE("hvp bilinearity and symmetry for smooth activations") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {6, 10, 3}, Activation::tanh);
    Model m = build_model(spec, 77);
    LossFn f = sigmoid_mlp_loss(m, one_hot_rows({1}, 3));
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = random_tensor({1, 6}, rng, -0.7, 0.7);
        Tensor u = random_tensor({1, 6}, rng);
        Tensor v = random_tensor({1, 6}, rng);
        const double uhv = dot(u, hvp(f, x, v));
        const double vhu = dot(v, hvp(f, x, u));
        CHECK(std::abs(uhv - vhu) / std::max({std::abs(uhv), std::abs(vhu), 1e-12}) < 1e-6);
    }
}

TEST_CASE("cg solves the identity in one iteration") {
    Rng rng(12);
    Tensor b = random_tensor({6}, rng);
    auto result = cg_solve([](const Tensor& p) { return p; }, b, 1e-12, 10, 0.0);
    CHECK(result.converged);
    CHECK(result.iterations <= 1);
    CHECK(rel_err(result.x, b) < 1e-12);
}

TEST_CASE("cg inverts a diagonal") {
    Tensor d({5}, {1, 2, 3, 4, 5});
    Tensor b({5}, {1, 1, 1, 1, 1});
    auto result = cg_solve(
        [&](const Tensor& p) {
            Tensor out = p;
            for (std::size_t i = 0; i < 5; ++i) out[i] *= d[i];
            return out;
        },
        b, 1e-14, 50, 0.0);
    CHECK(result.converged);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(result.x[i] == doctest::Approx(1.0 / d[i]).epsilon(1e-10));
}

TEST_CASE("cg matches a dense direct solve on random SPD systems") {
    Rng rng(21);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 50;
        Tensor a = random_spd(n, rng);
        Tensor b = random_tensor({n}, rng);
        auto apply = [&](const Tensor& p) {
            Tensor col({n, 1}, std::vector<double>(p.data().begin(), p.data().end()));
            Tensor out = matmul(a, col);
            return Tensor({n}, std::vector<double>(out.data().begin(), out.data().end()));
        };
        auto result = cg_solve(apply, b, 1e-10, 200, 0.0);
        CHECK(result.converged);
        CHECK(result.iterations <= 200);

        // residual against the operator
        Tensor r = apply(result.x);
        axpy(-1.0, b, r);
        CHECK(norm2(r) < 1e-8 * std::max(1.0, norm2(b)));

        Tensor direct = dense_solve(a, b);
        CHECK(rel_err(result.x, direct) < 1e-6);
    }
}

TEST_CASE("cg flags an indefinite operator instead of crashing") {
    Tensor b({3}, {1, 2, 3});
    auto result = cg_solve([](const Tensor& p) { return scale(p, -1.0); }, b, 1e-10, 20, 0.0);
    CHECK(result.indefinite);
    CHECK_FALSE(result.converged);
    CHECK(result.x.all_finite());
}

TEST_CASE("cg with damping always terminates with a finite iterate") {
    Rng rng(33);
    // indefinite operator, but damping dominates
    Tensor a = random_tensor({8, 8}, rng);
    // symmetrize with negative eigenvalues likely
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double s = 0.5 * (a.at(i, j) + a.at(j, i));
            a.at(i, j) = a.at(j, i) = s;
        }
    Tensor b = random_tensor({8}, rng);
    auto apply = [&](const Tensor& p) {
        Tensor col({8, 1}, std::vector<double>(p.data().begin(), p.data().end()));
        Tensor out = matmul(a, col);
        return Tensor({8}, std::vector<double>(out.data().begin(), out.data().end()));
    };
    auto result = cg_solve(apply, b, 1e-10, 100, 25.0);
    CHECK(result.x.all_finite());
}

TEST_CASE("newton refinement is exact on SPD quadratics") {
    Rng rng(44);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 6;
        Tensor a = random_spd(n, rng);
        Tensor target = random_tensor({1, n}, rng);
        // 1/2 (x-a0) A (x-a0)^T
        LossFn f = [&](Graph& g, Value x) {
            Value shift = g.sub(x, g.constant(target));
            Value av = g.constant(a);
            return g.scale(g.sum(g.mul(shift, g.matmul(shift, av))), 0.5);
        };
        Tensor x0 = random_tensor({1, n}, rng);
        CgSettings cg;
        cg.tol = 1e-12;
        cg.max_iters = 200;
        cg.damping = 0.0;
        NewtonResult res = newton_refine(f, x0, cg);
        CHECK(rel_err(res.x, target) < 1e-6);
        CHECK(res.diag.loss_after < res.diag.loss_before);
    }
}

TEST_CASE("newton step on a linear loss with damping is a scaled gradient step") {
    // H = 0, so (0 + mu I) dx = -grad  =>  dx = -grad / mu
    LossFn f = [](Graph& g, Value x) { return g.scale(g.sum(x), 3.0); };
    Tensor x0({1, 4}, {1.0, 2.0, 3.0, 4.0});
    CgSettings cg;
    cg.damping = 0.5;
    cg.tol = 1e-12;
    NewtonResult res = newton_refine(f, x0, cg);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(res.x[i] == doctest::Approx(x0[i] - 3.0 / 0.5).epsilon(1e-9));
}
