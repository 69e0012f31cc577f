#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "manifold.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"

using namespace minv;
using minv::testing::random_tensor;

namespace {

Model linear_generator(const Tensor& w) {
    ModelSpec spec;
    spec.role = ModelRole::generator;
    spec.layers = {{w.rows(), w.cols(), Activation::linear}};
    spec.latent_dim = w.rows();
    spec.latent_prior = LatentPrior::uniform;
    spec.input_range = "latent";
    spec.output_range = "R";
    Model g;
    g.spec = spec;
    g.weights.push_back(w);
    g.biases.emplace_back(std::vector<std::size_t>{w.cols()});
    g.validate();
    return g;
}

Tensor identity(std::size_t n) {
    Tensor w({n, n});
    for (std::size_t i = 0; i < n; ++i) w.at(i, i) = 1.0;
    return w;
}

} // namespace

TEST_CASE("spectral norm matches known singular values") {
    CHECK(spectral_norm(identity(5)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(spectral_norm(scale(identity(4), 2.0)) == doctest::Approx(2.0).epsilon(1e-9));

    // diag(3, 1, 0.5)
    Tensor d({3, 3});
    d.at(0, 0) = 3.0;
    d.at(1, 1) = 1.0;
    d.at(2, 2) = 0.5;
    CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-9));

    // rank-1 outer product u v^T has sigma = ||u|| ||v||
    Tensor uv({2, 3}, {2.0, 4.0, 4.0, 1.0, 2.0, 2.0}); // u=(2,1), v=(1,2,2)
    CHECK(spectral_norm(uv) == doctest::Approx(std::sqrt(5.0) * 3.0).epsilon(1e-9));
}

TEST_CASE("identity generator has beta exactly 1") {
    Model g = linear_generator(identity(6));
    LipschitzReport rep = estimate_lipschitz(g, 500, 3);
    CHECK(rep.beta_upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.beta_empirical == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.beta_empirical <= rep.beta_upper + 1e-9);
}

TEST_CASE("2I generator has beta exactly 2") {
    Model g = linear_generator(scale(identity(4), 2.0));
    LipschitzReport rep = estimate_lipschitz(g, 500, 4);
    CHECK(rep.beta_upper == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.beta_empirical == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("trained-shape generator keeps beta_empirical under beta_upper over many pairs") {
    ModelSpec spec = ModelSpec::dense(ModelRole::generator, {8, 32, 25}, Activation::relu);
    Model g = build_model(spec, 77);
    LipschitzReport rep = estimate_lipschitz(g, 10000, 5);
    CHECK(rep.pairs == 10000);
    CHECK(rep.beta_empirical > 0.0);
    CHECK(rep.beta_empirical <= rep.beta_upper + 1e-9);
}

TEST_CASE("sigmoid output layers tighten the bound by 1/4") {
    Tensor w = identity(3);
    Model lin = linear_generator(w);
    Model sig = lin;
    sig.spec.layers.back().act = Activation::sigmoid;
    sig.spec.output_range = "[0,1]";
    CHECK(lipschitz_upper_bound(sig) ==
          doctest::Approx(0.25 * lipschitz_upper_bound(lin)).epsilon(1e-12));
}

TEST_CASE("manifold gap closed forms") {
    Tensor p({1, 2}, {0.0, 0.0});
    Tensor q({1, 2}, {3.0, 4.0});
    CHECK(manifold_gap(p, q) == doctest::Approx(5.0));

    // overlapping clouds share a point
    Tensor p2({2, 2}, {0.0, 0.0, 1.0, 1.0});
    Tensor q2({2, 2}, {5.0, 5.0, 1.0, 1.0});
    CHECK(manifold_gap(p2, q2) == doctest::Approx(0.0));

    CHECK_THROWS_AS((void)manifold_gap(p, Tensor({1, 3})), Error);
}

TEST_CASE("manifold gap is symmetric and permutation invariant") {
    Rng rng(8);
    Tensor p = random_tensor({40, 6}, rng, 0.0, 1.0);
    Tensor q = random_tensor({30, 6}, rng, 2.0, 3.0);
    const double ab = manifold_gap(p, q);
    CHECK(manifold_gap(q, p) == doctest::Approx(ab).epsilon(1e-15));

    // shuffle rows of p and rescan
    std::vector<std::size_t> order(40);
    for (std::size_t i = 0; i < 40; ++i) order[i] = i;
    Rng shuffle(9);
    for (std::size_t i = 40; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    Tensor ps({40, 6});
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 6; ++j) ps.at(i, j) = p.at(order[i], j);
    CHECK(manifold_gap(ps, q) == doctest::Approx(ab).epsilon(1e-15));
}

TEST_CASE("latent gap bound arithmetic") {
    CHECK(latent_gap_bound(5.0, 2.0) == doctest::Approx(2.5));
    CHECK(latent_gap_bound(0.0, 2.0) == 0.0); // overlapping manifolds impose no gap
    CHECK_THROWS_AS((void)latent_gap_bound(1.0, 0.0), Error);
}

TEST_CASE("no bound violations over sampled pairs (implied by Lipschitz bound)") {
    ModelSpec spec = ModelSpec::dense(ModelRole::generator, {6, 24, 16}, Activation::relu);
    Model g = build_model(spec, 13);
    const double beta = lipschitz_upper_bound(g);
    // any gamma: pick a mid-scale one
    CHECK(count_gap_bound_violations(g, 0.3, beta, 4000, 17) == 0);
}

TEST_CASE("interpolation endpoints reproduce exactly and steps obey the Lipschitz bound") {
    ModelSpec gspec = ModelSpec::dense(ModelRole::generator, {5, 16, 9}, Activation::relu);
    Model gen = build_model(gspec, 3);
    ModelSpec cspec = ModelSpec::dense(ModelRole::classifier, {9, 8, 3}, Activation::relu);
    Model cls = build_model(cspec, 4);
    ModelSpec dspec = ModelSpec::dense(ModelRole::discriminator, {9, 8, 1}, Activation::relu);
    Model disc = build_model(dspec, 5);

    Rng rng(6);
    Tensor z1 = random_tensor({5}, rng);
    Tensor z2 = random_tensor({5}, rng);

    InterpolationTrace tr = interpolate(gen, cls, &disc, z1, z2, 9);
    REQUIRE(tr.steps.size() == 9);

    Tensor g1 = infer(gen, z1);
    Tensor g2 = infer(gen, z2);
    for (std::size_t i = 0; i < g1.size(); ++i) {
        CHECK(tr.steps.front().image[i] == g1[i]);
        CHECK(tr.steps.back().image[i] == g2[i]);
    }

    const double beta = lipschitz_upper_bound(gen);
    for (std::size_t k = 1; k < tr.steps.size(); ++k) {
        CHECK(tr.steps[k].image_step <= beta * tr.steps[k].latent_step + 1e-12);
        CHECK(tr.steps[k].confidences.size() == 3);
        CHECK(tr.steps[k].disc_score >= 0.0);
        CHECK(tr.steps[k].disc_score <= 1.0);
    }
}

TEST_CASE("two-step interpolation is exactly the endpoints") {
    ModelSpec gspec = ModelSpec::dense(ModelRole::generator, {3, 6, 4}, Activation::relu);
    Model gen = build_model(gspec, 21);
    ModelSpec cspec = ModelSpec::dense(ModelRole::classifier, {4, 6, 2}, Activation::relu);
    Model cls = build_model(cspec, 22);
    Rng rng(23);
    Tensor z1 = random_tensor({3}, rng);
    Tensor z2 = random_tensor({3}, rng);
    InterpolationTrace tr = interpolate(gen, cls, nullptr, z1, z2, 2);
    REQUIRE(tr.steps.size() == 2);
    CHECK(tr.steps[0].t == 0.0);
    CHECK(tr.steps[1].t == 1.0);
    CHECK(tr.steps[1].disc_score < 0.0); // no discriminator supplied

    // z1 == z2 -> all steps identical
    InterpolationTrace same = interpolate(gen, cls, nullptr, z1, z1, 5);
    for (const auto& s : same.steps)
        for (std::size_t i = 0; i < s.image.size(); ++i)
            CHECK(s.image[i] == same.steps[0].image[i]);

    CHECK_THROWS_AS((void)interpolate(gen, cls, nullptr, z1, z2, 1), Error);
}

TEST_CASE("argmax class flips along a path between latents of different classes") {
    // classifier that reads coordinate 0: class 0 for low, class 1 for high
    ModelSpec cspec;
    cspec.role = ModelRole::classifier;
    cspec.layers = {{2, 2, Activation::softmax_output}};
    cspec.input_range = "[0,1]";
    cspec.output_range = "simplex";
    Model cls;
    cls.spec = cspec;
    cls.weights.push_back(Tensor({2, 2}, {-8.0, 8.0, 0.0, 0.0}));
    cls.biases.push_back(Tensor({1 * 2}, {4.0, -4.0}));
    cls.validate();

    Model gen = linear_generator(identity(2));
    Tensor z1({2}, {0.0, 0.5}); // classifier says class 0
    Tensor z2({2}, {1.0, 0.5}); // classifier says class 1
    InterpolationTrace tr = interpolate(gen, cls, nullptr, z1, z2, 11);

    auto argmax = [](const std::vector<double>& v) {
        return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    CHECK(argmax(tr.steps.front().confidences) == 0);
    CHECK(argmax(tr.steps.back().confidences) == 1);
    int flips = 0;
    for (std::size_t k = 1; k < tr.steps.size(); ++k)
        if (argmax(tr.steps[k].confidences) != argmax(tr.steps[k - 1].confidences)) ++flips;
    CHECK(flips >= 1);
}
