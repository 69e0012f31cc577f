#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace minv {

struct LipschitzReport {
    double beta_empirical = 0.0;
    double beta_upper = 0.0;
    std::size_t pairs = 0;
    std::string sampler;
    std::uint64_t seed = 0;
};

struct ManifoldGapReport {
    double gamma = 0.0;
    double latent_gap_bound = 0.0; // gamma / beta_upper
    double beta_upper = 0.0;
    std::int32_t class_a = 0, class_b = 0;
    std::size_t count_a = 0, count_b = 0;
};

struct InterpolationStep {
    double t = 0.0;
    Tensor image;
    std::vector<double> confidences;
    double disc_score = -1.0; // < 0 when no discriminator given
    double image_step = 0.0;  // ||G(z_k) - G(z_{k-1})||
    double latent_step = 0.0; // ||z_k - z_{k-1}||
};

struct InterpolationTrace {
    Tensor z1, z2;
    std::vector<InterpolationStep> steps;
};

// largest singular value via power iteration
double spectral_norm(const Tensor& w, int iters = 100, double tol = 1e-9,
                     std::uint64_t seed = 0);

// product of per-layer spectral norms and activation Lipschitz constants
// (relu/tanh/linear = 1, sigmoid = 1/4)
double lipschitz_upper_bound(const Model& m);

// max ||G(z1)-G(z2)|| / ||z1-z2|| over `pairs` samples from the generator's
// prior; every fourth pair is a local probe z2 = z1 + 1e-4 * direction
LipschitzReport estimate_lipschitz(const Model& generator, std::size_t pairs,
                                   std::uint64_t seed);

// exact min cross-pair Euclidean distance between two sample batches [n,d]
double manifold_gap(const Tensor& samples_p, const Tensor& samples_q);

double latent_gap_bound(double gamma, double beta_upper);

// zero when the implication "image distance >= gamma => latent distance >=
// gamma/beta_upper" holds over `pairs` sampled latent pairs
std::size_t count_gap_bound_violations(const Model& generator, double gamma, double beta_upper,
                                       std::size_t pairs, std::uint64_t seed);

InterpolationTrace interpolate(const Model& generator, const Model& classifier,
                               const Model* discriminator, const Tensor& z1, const Tensor& z2,
                               std::size_t steps);

} // namespace minv
