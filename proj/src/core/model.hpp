#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graph.hpp"
#include "tensor.hpp"

namespace minv {

enum class Activation { relu, sigmoid, tanh, linear, softmax_output };
enum class ModelRole { classifier, generator, discriminator };
enum class LatentPrior { normal, uniform }; // uniform means U[-1,1]

Activation activation_from_string(const std::string& s);
const char* activation_name(Activation a);
ModelRole role_from_string(const std::string& s);
const char* role_name(ModelRole r);
LatentPrior prior_from_string(const std::string& s);
const char* prior_name(LatentPrior p);

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::linear;
};

struct ModelSpec {
    ModelRole role = ModelRole::classifier;
    std::vector<LayerSpec> layers;
    std::size_t latent_dim = 0; // generators only
    LatentPrior latent_prior = LatentPrior::normal;
    std::string input_range;
    std::string output_range;

    std::size_t input_size() const;
    std::size_t output_size() const;
    void validate() const;

    // dense chain from the listed sizes: sizes.front() inputs, sizes.back()
    // outputs, `hidden_act` between, role-appropriate final activation
    static ModelSpec dense(ModelRole role, const std::vector<std::size_t>& sizes,
                           Activation hidden_act = Activation::relu);
};

struct Provenance {
    std::uint64_t seed = 0;
    std::string dataset;
    std::uint32_t epochs = 0;
};

struct Model {
    ModelSpec spec;
    std::vector<Tensor> weights; // per layer, [in, out]
    std::vector<Tensor> biases;  // per layer, [out]
    Provenance prov;

    void validate() const;
    std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, reproducible from seed.
Model build_model(const ModelSpec& spec, std::uint64_t seed);

// Pure forward pass. Final activation applied (classifier rows are softmax
// probabilities). Accepts [n, in] or a single [in] sample.
Tensor infer(const Model& m, const Tensor& batch);
// Same but stops before the final layer's activation.
Tensor infer_pre_final(const Model& m, const Tensor& batch);

// Draw a batch of latent codes from a generator's training prior.
Tensor sample_latent(const ModelSpec& gen_spec, std::size_t n, class Rng& rng);

// ---- graph binding (for training and attacks) ----

struct GraphModel {
    std::vector<Value> weights;
    std::vector<Value> biases;
};

GraphModel bind_model(Graph& g, const Model& m, bool trainable);
// forward through all layers, final activation NOT applied
Value forward_pre_final(Graph& g, const GraphModel& gm, const ModelSpec& spec, Value x);
// applies the final activation for sigmoid/tanh/linear outputs; classifier
// softmax is not a graph op (losses fuse it), so this rejects softmax_output
Value apply_final_activation(Graph& g, const ModelSpec& spec, Value pre);

// ---- serialization (bit-exact; format documented in README) ----

inline constexpr char kModelMagic[8] = {'M', 'I', 'N', 'V', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

} // namespace minv
