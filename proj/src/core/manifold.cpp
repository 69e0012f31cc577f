#include "manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rng.hpp"

namespace minv {

double spectral_norm(const Tensor& w, int iters, double tol, std::uint64_t seed) {
    require(w.rank() == 2, Errc::shape_mismatch, "spectral_norm: expects a matrix");
    Rng rng(derive_seed(seed, "power-iteration"));
    // iterate u -> normalize(u W W^T) with u a [1, rows] row vector
    Tensor u({1, w.rows()});
    for (double& x : u.data()) x = rng.normal();
    double un = norm2(u);
    for (double& x : u.data()) x /= un;

    double sigma = 0.0;
    for (int k = 0; k < iters; ++k) {
        Tensor y = matmul(u, w); // [1, cols]
        const double prev = sigma;
        sigma = norm2(y); // u is unit, so this approaches the top singular value
        if (sigma == 0.0) return 0.0;
        Tensor back = matmul_bt(y, w); // [1, rows]
        const double bn = norm2(back);
        if (bn == 0.0) return sigma;
        for (double& x : back.data()) x /= bn;
        u = std::move(back);
        if (k > 0 && std::abs(sigma - prev) <= tol * std::max(1.0, sigma)) break;
    }
    return norm2(matmul(u, w));
}

namespace {

double activation_lipschitz(Activation a) {
    switch (a) {
        case Activation::relu:
        case Activation::tanh:
        case Activation::linear:
            return 1.0;
        case Activation::sigmoid:
            return 0.25;
        case Activation::softmax_output:
            return 1.0;
    }
    return 1.0;
}

} // namespace

double lipschitz_upper_bound(const Model& m) {
    double beta = 1.0;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        beta *= spectral_norm(m.weights[i], 100, 1e-9, 7 + i);
        beta *= activation_lipschitz(m.spec.layers[i].act);
    }
    return beta;
}

LipschitzReport estimate_lipschitz(const Model& generator, std::size_t pairs,
                                   std::uint64_t seed) {
    require(generator.spec.role == ModelRole::generator, Errc::invalid_argument,
            "estimate_lipschitz: model is not a generator");
    require(pairs >= 1, Errc::invalid_argument, "estimate_lipschitz: need at least one pair");

    LipschitzReport rep;
    rep.seed = seed;
    rep.pairs = pairs;
    rep.sampler = std::string(prior_name(generator.spec.latent_prior)) +
                  " prior pairs, every 4th a 1e-4 local probe";
    rep.beta_upper = lipschitz_upper_bound(generator);

    Rng rng(derive_seed(seed, "lipschitz-pairs"));
    const std::size_t d = generator.spec.latent_dim;
    const std::size_t chunk = 256;

    double best = 0.0;
    std::size_t done = 0;
    while (done < pairs) {
        const std::size_t n = std::min(chunk, pairs - done);
        Tensor z1({n, d}), z2({n, d});
        auto a = z1.data();
        auto b = z2.data();
        for (std::size_t i = 0; i < n; ++i) {
            const bool local = (done + i) % 4 == 3;
            for (std::size_t j = 0; j < d; ++j) {
                const double v = generator.spec.latent_prior == LatentPrior::normal
                                     ? rng.normal()
                                     : rng.uniform(-1.0, 1.0);
                a[i * d + j] = v;
            }
            if (local) {
                for (std::size_t j = 0; j < d; ++j)
                    b[i * d + j] = a[i * d + j] + 1e-4 * rng.normal();
            } else {
                for (std::size_t j = 0; j < d; ++j)
                    b[i * d + j] = generator.spec.latent_prior == LatentPrior::normal
                                       ? rng.normal()
                                       : rng.uniform(-1.0, 1.0);
            }
        }
        Tensor g1 = infer(generator, z1);
        Tensor g2 = infer(generator, z2);
        auto g1d = g1.data();
        auto g2d = g2.data();
        const std::size_t od = g1.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double zn = 0.0, gn = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = a[i * d + j] - b[i * d + j];
                zn += diff * diff;
            }
            if (zn == 0.0) continue; // degenerate pair, skip
            for (std::size_t j = 0; j < od; ++j) {
                const double diff = g1d[i * od + j] - g2d[i * od + j];
                gn += diff * diff;
            }
            best = std::max(best, std::sqrt(gn / zn));
        }
        done += n;
    }
    rep.beta_empirical = best;
    return rep;
}

double manifold_gap(const Tensor& samples_p, const Tensor& samples_q) {
    require(samples_p.rank() == 2 && samples_q.rank() == 2, Errc::shape_mismatch,
            "manifold_gap: expects [n,d] batches");
    require(samples_p.rows() >= 1 && samples_q.rows() >= 1, Errc::invalid_argument,
            "manifold_gap: empty sample batch");
    require(samples_p.cols() == samples_q.cols(), Errc::shape_mismatch,
            "manifold_gap: feature dimensions differ");
    const std::size_t d = samples_p.cols();
    auto pd = samples_p.data();
    auto qd = samples_q.data();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples_p.rows(); ++i) {
        const double* prow = pd.data() + i * d;
        for (std::size_t j = 0; j < samples_q.rows(); ++j) {
            const double* qrow = qd.data() + j * d;
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = prow[k] - qrow[k];
                s += diff * diff;
            }
            best = std::min(best, s);
        }
    }
    return std::sqrt(best);
}

double latent_gap_bound(double gamma, double beta_upper) {
    require(beta_upper > 0.0, Errc::invalid_argument,
            "latent_gap_bound: beta upper bound must be positive");
    require(gamma >= 0.0, Errc::invalid_argument, "latent_gap_bound: gamma must be >= 0");
    return gamma / beta_upper;
}

std::size_t count_gap_bound_violations(const Model& generator, double gamma, double beta_upper,
                                       std::size_t pairs, std::uint64_t seed) {
    const double bound = latent_gap_bound(gamma, beta_upper);
    Rng rng(derive_seed(seed, "gap-check"));
    const std::size_t d = generator.spec.latent_dim;
    std::size_t violations = 0;
    const std::size_t chunk = 256;
    std::size_t done = 0;
    while (done < pairs) {
        const std::size_t n = std::min(chunk, pairs - done);
        Tensor z1({n, d}), z2({n, d});
        for (double& v : z1.data())
            v = generator.spec.latent_prior == LatentPrior::normal ? rng.normal()
                                                                   : rng.uniform(-1.0, 1.0);
        for (double& v : z2.data())
            v = generator.spec.latent_prior == LatentPrior::normal ? rng.normal()
                                                                   : rng.uniform(-1.0, 1.0);
        Tensor g1 = infer(generator, z1);
        Tensor g2 = infer(generator, z2);
        const std::size_t od = g1.cols();
        auto a = z1.data();
        auto b = z2.data();
        auto g1d = g1.data();
        auto g2d = g2.data();
        for (std::size_t i = 0; i < n; ++i) {
            double zn = 0.0, gn = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = a[i * d + j] - b[i * d + j];
                zn += diff * diff;
            }
            for (std::size_t j = 0; j < od; ++j) {
                const double diff = g1d[i * od + j] - g2d[i * od + j];
                gn += diff * diff;
            }
            if (std::sqrt(gn) >= gamma && std::sqrt(zn) < bound) ++violations;
        }
        done += n;
    }
    return violations;
}

InterpolationTrace interpolate(const Model& generator, const Model& classifier,
                               const Model* discriminator, const Tensor& z1, const Tensor& z2,
                               std::size_t steps) {
    require(steps >= 2, Errc::invalid_argument, "interpolate: need at least 2 steps");
    require(z1.same_shape(z2), Errc::shape_mismatch, "interpolate: endpoint shapes differ");
    require(z1.size() == generator.spec.latent_dim, Errc::shape_mismatch,
            "interpolate: endpoint dimension does not match generator latent size");
    require(generator.spec.output_size() == classifier.spec.input_size(), Errc::shape_mismatch,
            "interpolate: generator output does not match classifier input");

    InterpolationTrace tr;
    tr.z1 = z1;
    tr.z2 = z2;
    Tensor prev_img;
    Tensor prev_z;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps - 1);
        Tensor z(z1.shape());
        if (k == 0) {
            z = z1;
        } else if (k == steps - 1) {
            z = z2; // endpoints reproduce exactly, no fp drift
        } else {
            auto zd = z.data();
            auto a = z1.data();
            auto b = z2.data();
            for (std::size_t i = 0; i < zd.size(); ++i) zd[i] = a[i] + t * (b[i] - a[i]);
        }
        InterpolationStep step;
        step.t = t;
        step.image = infer(generator, z);
        Tensor probs = infer(classifier, step.image);
        step.confidences.assign(probs.data().begin(), probs.data().end());
        if (discriminator) step.disc_score = infer(*discriminator, step.image)[0];
        if (k > 0) {
            step.image_step = norm2(sub(step.image, prev_img));
            step.latent_step = norm2(sub(z, prev_z));
        }
        prev_img = step.image;
        prev_z = z;
        tr.steps.push_back(std::move(step));
    }
    return tr;
}

} // namespace minv
