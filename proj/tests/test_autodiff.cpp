#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "graph.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"
#include "train.hpp"

using namespace minv;
using minv::testing::fd_grad;
using minv::testing::random_tensor;
using minv::testing::rel_err;

TEST_CASE("square function gradient at x=3") {
    Graph g;
    Value x = g.leaf(Tensor({1}, {3.0}));
    Value loss = g.sum(g.mul(x, x));
    Tensor grad = g.grad_of(loss, x);
    CHECK(grad[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("sum gradient is all ones for any shape") {
    Rng rng(11);
    for (auto shape : std::vector<std::vector<std::size_t>>{{4}, {3, 5}, {2, 3}}) {
        Graph g;
        Value x = g.leaf(random_tensor(shape, rng));
        Tensor grad = g.grad_of(g.sum(x), x);
        for (double v : grad.data()) CHECK(v == 1.0);
    }
}

TEST_CASE("leaf not reached by the loss gets a zero gradient") {
    Graph g;
    Value x = g.leaf(Tensor({1}, {2.0}));
    Value unused = g.leaf(Tensor({3}, {1.0, 2.0, 3.0}));
    Value loss = g.sum(g.mul(x, x));
    Value leaves[] = {x, unused};
    auto grads = g.grad(loss, leaves);
    CHECK(grads[0][0] == doctest::Approx(4.0));
    for (double v : grads[1].data()) CHECK(v == 0.0);
}

TEST_CASE("non-scalar loss is a contract violation") {
    Graph g;
    Value x = g.leaf(Tensor({2}, {1.0, 2.0}));
    Value y = g.mul(x, x);
    CHECK_THROWS_AS((void)g.grad_of(y, x), Error);
}

TEST_CASE("non-finite forward value raises a numeric error naming the node") {
    Graph g;
    Value x = g.leaf(Tensor({1}, {-1.0}));
    bool threw = false;
    try {
        (void)g.log(x); // log of a negative number
    } catch (const Error& e) {
        threw = true;
        CHECK(e.code() == Errc::numeric);
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
    CHECK(threw);
}

namespace {

// 3-layer ReLU MLP + softmax cross-entropy against fixed targets
double mlp_ce_loss(const Model& m, const Tensor& onehot, const Tensor& x) {
    Graph g;
    Value xv = g.constant(x);
    GraphModel gm = bind_model(g, m, false);
    Value logits = forward_pre_final(g, gm, m.spec, xv);
    return g.value(g.softmax_ce(logits, onehot)).item();
}

} // namespace

TEST_CASE("ReLU MLP cross-entropy gradient matches central finite differences") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {6, 16, 12, 5}, Activation::relu);
    Model m = build_model(spec, 123);
    Rng rng(77);
    Tensor x = random_tensor({4, 6}, rng, 0.05, 0.95);
    Tensor onehot = one_hot_rows({0, 2, 4, 1}, 5);

    Graph g;
    Value xv = g.leaf(x);
    GraphModel gm = bind_model(g, m, false);
    Value logits = forward_pre_final(g, gm, m.spec, xv);
    Tensor grad = g.grad_of(g.softmax_ce(logits, onehot), xv);

    Tensor fd = fd_grad([&](const Tensor& p) { return mlp_ce_loss(m, onehot, p); }, x, 1e-5);
    CHECK(rel_err(grad, fd) < 1e-4);
}

TEST_CASE("gradient check across mixed-activation compositions") {
    // dense nets with relu/sigmoid/tanh hidden layers, softmax-CE + lp losses
    const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::tanh};
    for (int trial = 0; trial < 9; ++trial) {
        Rng rng(1000 + trial);
        const std::size_t in = 3 + trial % 4, hidden = 8 + trial, out = 3;
        ModelSpec spec =
            ModelSpec::dense(ModelRole::classifier, {in, hidden, out}, acts[trial % 3]);
        Model m = build_model(spec, 200 + trial);
        Tensor x = random_tensor({2, in}, rng, -0.8, 0.8);
        Tensor onehot = one_hot_rows({0, 2}, out);
        const double lambda = 0.1;
        const int p = 1 + trial % 6;

        auto loss_at = [&](const Tensor& pt) {
            Graph g;
            Value xv = g.constant(pt);
            GraphModel gm = bind_model(g, m, false);
            Value logits = forward_pre_final(g, gm, m.spec, xv);
            Value loss = g.add(g.softmax_ce(logits, onehot), g.scale(g.lp_sum(xv, p), lambda));
            return g.value(loss).item();
        };

        Graph g;
        Value xv = g.leaf(x);
        GraphModel gm = bind_model(g, m, false);
        Value logits = forward_pre_final(g, gm, m.spec, xv);
        Value loss = g.add(g.softmax_ce(logits, onehot), g.scale(g.lp_sum(xv, p), lambda));
        Tensor grad = g.grad_of(loss, xv);
        Tensor fd = fd_grad(loss_at, x, 1e-5);
        INFO("trial ", trial, " p=", p);
        CHECK(rel_err(grad, fd) < 1e-4);
    }
}

TEST_CASE("gradients of GAN-style log losses match finite differences") {
    Rng rng(5);
    Tensor scores = random_tensor({6, 1}, rng, 0.1, 0.9);
    auto loss_at = [](const Tensor& s) {
        Graph g;
        Value sv = g.constant(s);
        Value l = g.neg(g.add(g.mean(g.log(g.clamp_min(sv, 1e-7))),
                              g.mean(g.log(g.clamp_min(g.rsub(1.0, sv), 1e-7)))));
        return g.value(l).item();
    };
    Graph g;
    Value sv = g.leaf(scores);
    Value l = g.neg(g.add(g.mean(g.log(g.clamp_min(sv, 1e-7))),
                          g.mean(g.log(g.clamp_min(g.rsub(1.0, sv), 1e-7)))));
    Tensor grad = g.grad_of(l, sv);
    CHECK(rel_err(grad, fd_grad(loss_at, scores, 1e-6)) < 1e-4);
}

TEST_CASE("lp_sum values and gradients") {
    Graph g;
    Value v = g.leaf(Tensor({2}, {3.0, -4.0}));
    CHECK(g.value(g.lp_sum(v, 2)).item() == doctest::Approx(25.0));
    CHECK(g.value(g.lp_sum(v, 1)).item() == doctest::Approx(7.0));

    Graph g2;
    Value w = g2.leaf(Tensor({2}, {2.0, -2.0}));
    Tensor grad = g2.grad_of(g2.lp_sum(w, 3), w);
    CHECK(grad[0] == doctest::Approx(12.0));
    CHECK(grad[1] == doctest::Approx(-12.0));

    Graph g3;
    Value z = g3.leaf(Tensor({2}, {0.0, 1.0}));
    Tensor g1 = g3.grad_of(g3.lp_sum(z, 1), z);
    CHECK(g1[0] == 0.0); // subgradient at 0
    CHECK(g1[1] == doctest::Approx(1.0));

    Graph g4;
    Value bad = g4.leaf(Tensor({1}, {1.0}));
    CHECK_THROWS_AS((void)g4.lp_sum(bad, 7), Error);
    CHECK_THROWS_AS((void)g4.lp_sum(bad, 0), Error);
}

TEST_CASE("identical seeds give bit-identical gradients") {
    auto run = [] {
        ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {4, 8, 3}, Activation::tanh);
        Model m = build_model(spec, 99);
        Rng rng(42);
        Tensor x = random_tensor({2, 4}, rng);
        Graph g;
        Value xv = g.leaf(x);
        GraphModel gm = bind_model(g, m, false);
        Value loss = g.softmax_ce(forward_pre_final(g, gm, m.spec, xv), one_hot_rows({1, 2}, 3));
        return g.grad_of(loss, xv);
    };
    Tensor a = run();
    Tensor b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
