#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdio>
#include <fstream>

#include "model.hpp"
#include "rng.hpp"
#include "support/oracles.hpp"

using namespace minv;
using minv::testing::random_tensor;

namespace {

std::string temp_path(const char* name) {
    return std::string("/tmp/minv-test-") + name + "-" + std::to_string(::getpid());
}

} // namespace

TEST_CASE("build is deterministic from the seed") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {784, 256, 6}, Activation::relu);
    Model a = build_model(spec, 7);
    Model b = build_model(spec, 7);
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        for (std::size_t i = 0; i < a.weights[l].size(); ++i)
            CHECK(a.weights[l][i] == b.weights[l][i]);
    Model c = build_model(spec, 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.weights[0].size() && !any_diff; ++i)
        any_diff = a.weights[0][i] != c.weights[0][i];
    CHECK(any_diff);
}

TEST_CASE("invalid specs are rejected") {
    ModelSpec empty;
    empty.role = ModelRole::classifier;
    CHECK_THROWS_AS(empty.validate(), Error);

    ModelSpec broken;
    broken.role = ModelRole::classifier;
    broken.layers = {{784, 256, Activation::relu}, {128, 10, Activation::softmax_output}};
    CHECK_THROWS_AS(broken.validate(), Error);

    // classifier must end in softmax
    ModelSpec nosoftmax;
    nosoftmax.role = ModelRole::classifier;
    nosoftmax.layers = {{4, 3, Activation::relu}, {3, 2, Activation::sigmoid}};
    CHECK_THROWS_AS(nosoftmax.validate(), Error);

    // discriminator must be a sigmoid scalar
    ModelSpec disc;
    disc.role = ModelRole::discriminator;
    disc.layers = {{4, 3, Activation::relu}, {3, 2, Activation::sigmoid}};
    CHECK_THROWS_AS(disc.validate(), Error);
}

TEST_CASE("classifier rows are probabilities") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {10, 16, 4}, Activation::relu);
    Model m = build_model(spec, 3);
    Rng rng(5);
    Tensor x = random_tensor({32, 10}, rng, 0.0, 1.0);
    Tensor y = infer(m, x);
    REQUIRE(y.rows() == 32);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j) {
            CHECK(y.at(i, j) >= 0.0);
            s += y.at(i, j);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("all-zero-weight classifier outputs uniform probabilities") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {8, 6, 5}, Activation::relu);
    Model m = build_model(spec, 1);
    for (auto& w : m.weights) w = Tensor(w.shape());
    Rng rng(6);
    Tensor y = infer(m, random_tensor({3, 8}, rng));
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j)
            CHECK(y.at(i, j) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("generator outputs stay in [0,1] across 1000 draws") {
    ModelSpec spec = ModelSpec::dense(ModelRole::generator, {16, 32, 64}, Activation::relu);
    Model g = build_model(spec, 11);
    Rng rng(12);
    Tensor z = sample_latent(g.spec, 1000, rng);
    Tensor x = infer(g, z);
    CHECK(x.min() >= 0.0);
    CHECK(x.max() <= 1.0);
}

TEST_CASE("single-sample inference matches batch inference") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {6, 8, 3}, Activation::tanh);
    Model m = build_model(spec, 9);
    Rng rng(10);
    Tensor x = random_tensor({6}, rng);
    Tensor single = infer(m, x);
    Tensor batch = infer(m, Tensor({1, 6}, std::vector<double>(x.data().begin(), x.data().end())));
    REQUIRE(single.rank() == 1);
    for (std::size_t j = 0; j < 3; ++j) CHECK(single[j] == batch.at(0, j));
}

TEST_CASE("infer rejects shape mismatches") {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {6, 8, 3}, Activation::relu);
    Model m = build_model(spec, 2);
    CHECK_THROWS_AS((void)infer(m, Tensor({2, 5})), Error);
}

TEST_CASE("save/load round-trips bit-exactly") {
    ModelSpec spec = ModelSpec::dense(ModelRole::generator, {8, 24, 36}, Activation::relu);
    spec.latent_prior = LatentPrior::uniform;
    Model m = build_model(spec, 1234);
    m.prov.dataset = "unit-test-corpus";
    m.prov.epochs = 17;

    const std::string path = temp_path("roundtrip");
    save_model(m, path);
    Model r = load_model(path);

    CHECK(r.spec.role == m.spec.role);
    CHECK(r.spec.latent_dim == m.spec.latent_dim);
    CHECK(r.spec.latent_prior == m.spec.latent_prior);
    CHECK(r.prov.seed == m.prov.seed);
    CHECK(r.prov.dataset == m.prov.dataset);
    CHECK(r.prov.epochs == m.prov.epochs);
    REQUIRE(r.weights.size() == m.weights.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (std::size_t i = 0; i < m.weights[l].size(); ++i)
            CHECK(r.weights[l][i] == m.weights[l][i]);
        for (std::size_t i = 0; i < m.biases[l].size(); ++i)
            CHECK(r.biases[l][i] == m.biases[l][i]);
    }

    // two saves of the same model are byte-identical
    const std::string path2 = temp_path("roundtrip2");
    save_model(m, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

namespace {

std::string saved_model_bytes() {
    ModelSpec spec = ModelSpec::dense(ModelRole::classifier, {4, 5, 3}, Activation::relu);
    Model m = build_model(spec, 55);
    const std::string path = temp_path("bytes");
    save_model(m, path);
    std::ifstream f(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::remove(path.c_str());
    return bytes;
}

Errc load_corrupted(std::string bytes, std::size_t offset, char value) {
    if (offset < bytes.size()) bytes[offset] = value;
    const std::string path = temp_path("corrupt");
    {
        std::ofstream f(path, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    Errc got = Errc::invalid_argument;
    try {
        (void)load_model(path);
    } catch (const Error& e) {
        got = e.code();
    }
    std::remove(path.c_str());
    return got;
}

} // namespace

TEST_CASE("corruption modes produce distinct errors") {
    const std::string bytes = saved_model_bytes();

    CHECK(load_corrupted(bytes, 0, 'X') == Errc::format);    // magic
    CHECK(load_corrupted(bytes, 8, 99) == Errc::version);    // version field
    CHECK(load_corrupted(bytes, bytes.size() - 30, 'Z') == Errc::checksum); // a blob byte

    // truncated file
    {
        const std::string path = temp_path("trunc");
        std::ofstream f(path, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        f.close();
        Errc got = Errc::invalid_argument;
        try {
            (void)load_model(path);
        } catch (const Error& e) {
            got = e.code();
        }
        CHECK(got == Errc::truncated);
        std::remove(path.c_str());
    }

    // missing file
    CHECK_THROWS_AS((void)load_model("/nonexistent/minv.model"), Error);
}
