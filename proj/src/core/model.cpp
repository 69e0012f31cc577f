#include "model.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rng.hpp"
#include "textkv.hpp"

namespace minv {

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "tanh") return Activation::tanh;
    if (s == "linear") return Activation::linear;
    if (s == "softmax-output") return Activation::softmax_output;
    raise(Errc::format, "unknown activation '" + s + "'");
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
        case Activation::softmax_output: return "softmax-output";
    }
    return "?";
}

ModelRole role_from_string(const std::string& s) {
    if (s == "classifier") return ModelRole::classifier;
    if (s == "generator") return ModelRole::generator;
    if (s == "discriminator") return ModelRole::discriminator;
    raise(Errc::format, "unknown model role '" + s + "'");
}

const char* role_name(ModelRole r) {
    switch (r) {
        case ModelRole::classifier: return "classifier";
        case ModelRole::generator: return "generator";
        case ModelRole::discriminator: return "discriminator";
    }
    return "?";
}

LatentPrior prior_from_string(const std::string& s) {
    if (s == "normal") return LatentPrior::normal;
    if (s == "uniform") return LatentPrior::uniform;
    raise(Errc::format, "unknown latent prior '" + s + "' (expected normal or uniform)");
}

const char* prior_name(LatentPrior p) {
    return p == LatentPrior::normal ? "normal" : "uniform";
}

std::size_t ModelSpec::input_size() const {
    require(!layers.empty(), Errc::invalid_argument, "model spec has no layers");
    return layers.front().in;
}

std::size_t ModelSpec::output_size() const {
    require(!layers.empty(), Errc::invalid_argument, "model spec has no layers");
    return layers.back().out;
}

void ModelSpec::validate() const {
    require(!layers.empty(), Errc::invalid_argument, "model spec has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        require(layers[i].in > 0 && layers[i].out > 0, Errc::invalid_argument,
                "layer " + std::to_string(i) + ": sizes must be positive");
        if (i + 1 < layers.size()) {
            require(layers[i].out == layers[i + 1].in, Errc::invalid_argument,
                    "layer sizes do not chain: layer " + std::to_string(i) + " outputs " +
                        std::to_string(layers[i].out) + " but layer " + std::to_string(i + 1) +
                        " expects " + std::to_string(layers[i + 1].in));
            require(layers[i].act != Activation::softmax_output, Errc::invalid_argument,
                    "softmax-output is only valid on the final layer");
        }
    }
    const Activation last = layers.back().act;
    switch (role) {
        case ModelRole::classifier:
            require(last == Activation::softmax_output, Errc::invalid_argument,
                    "classifier must end in softmax-output");
            break;
        case ModelRole::discriminator:
            require(last == Activation::sigmoid && layers.back().out == 1,
                    Errc::invalid_argument, "discriminator must end in a sigmoid scalar");
            break;
        case ModelRole::generator:
            // sigmoid for images; tanh/linear outputs are allowed for
            // non-pixel domains (e.g. 2-D point clouds)
            require(last == Activation::sigmoid || last == Activation::tanh ||
                        last == Activation::linear,
                    Errc::invalid_argument,
                    "generator must end in sigmoid, tanh or linear");
            require(latent_dim == layers.front().in, Errc::invalid_argument,
                    "generator latent_dim must equal the first layer input size");
            break;
    }
    if (role != ModelRole::generator)
        require(latent_dim == 0, Errc::invalid_argument,
                "latent_dim is only meaningful for generators");
}

ModelSpec ModelSpec::dense(ModelRole role, const std::vector<std::size_t>& sizes,
                           Activation hidden_act) {
    require(sizes.size() >= 2, Errc::invalid_argument, "dense spec needs at least in/out sizes");
    ModelSpec s;
    s.role = role;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
        s.layers.push_back({sizes[i], sizes[i + 1], hidden_act});
    switch (role) {
        case ModelRole::classifier:
            s.layers.back().act = Activation::softmax_output;
            s.input_range = "[0,1]";
            s.output_range = "simplex";
            break;
        case ModelRole::generator:
            s.layers.back().act = Activation::sigmoid;
            s.latent_dim = sizes.front();
            s.input_range = "latent";
            s.output_range = "[0,1]";
            break;
        case ModelRole::discriminator:
            s.layers.back().act = Activation::sigmoid;
            s.input_range = "[0,1]";
            s.output_range = "(0,1)";
            break;
    }
    s.validate();
    return s;
}

void Model::validate() const {
    spec.validate();
    require(weights.size() == spec.layers.size() && biases.size() == spec.layers.size(),
            Errc::invalid_argument, "model parameter count does not match spec");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& l = spec.layers[i];
        require(weights[i].rank() == 2 && weights[i].rows() == l.in && weights[i].cols() == l.out,
                Errc::shape_mismatch, "weight shape mismatch at layer " + std::to_string(i));
        require(biases[i].rank() == 1 && biases[i].shape()[0] == l.out, Errc::shape_mismatch,
                "bias shape mismatch at layer " + std::to_string(i));
        require(weights[i].all_finite() && biases[i].all_finite(), Errc::numeric,
                "non-finite parameters at layer " + std::to_string(i));
    }
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
    return n;
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    Model m;
    m.spec = spec;
    m.prov.seed = seed;
    Rng rng(derive_seed(seed, "model-init"));
    for (const LayerSpec& l : spec.layers) {
        const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        Tensor w({l.in, l.out});
        for (double& v : w.data()) v = rng.uniform(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(std::vector<std::size_t>{l.out});
    }
    return m;
}

namespace {

void apply_activation(Tensor& t, Activation a) {
    switch (a) {
        case Activation::linear:
            break;
        case Activation::relu:
            for (double& v : t.data()) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::sigmoid:
            for (double& v : t.data()) {
                if (v >= 0.0) {
                    v = 1.0 / (1.0 + std::exp(-v));
                } else {
                    double e = std::exp(v);
                    v = e / (1.0 + e);
                }
            }
            break;
        case Activation::tanh:
            for (double& v : t.data()) v = std::tanh(v);
            break;
        case Activation::softmax_output:
            softmax_rows_inplace(t);
            break;
    }
}

Tensor as_batch(const Tensor& batch, std::size_t input_size, bool& was_vector) {
    was_vector = batch.rank() == 1;
    if (was_vector) {
        require(batch.size() == input_size, Errc::shape_mismatch,
                "input size " + std::to_string(batch.size()) + " does not match model input " +
                    std::to_string(input_size));
        return Tensor({1, input_size}, std::vector<double>(batch.data().begin(), batch.data().end()));
    }
    require(batch.rank() == 2 && batch.cols() == input_size, Errc::shape_mismatch,
            "batch shape " + batch.shape_str() + " does not match model input " +
                std::to_string(input_size));
    return batch;
}

Tensor forward_impl(const Model& m, const Tensor& batch, bool apply_last_act) {
    bool was_vector = false;
    Tensor h = as_batch(batch, m.spec.input_size(), was_vector);
    for (std::size_t i = 0; i < m.spec.layers.size(); ++i) {
        h = add_rowvec(matmul(h, m.weights[i]), m.biases[i]);
        if (i + 1 < m.spec.layers.size() || apply_last_act)
            apply_activation(h, m.spec.layers[i].act);
    }
    if (was_vector)
        return Tensor({h.size()}, std::vector<double>(h.data().begin(), h.data().end()));
    return h;
}

} // namespace

Tensor infer(const Model& m, const Tensor& batch) {
    return forward_impl(m, batch, true);
}

Tensor infer_pre_final(const Model& m, const Tensor& batch) {
    return forward_impl(m, batch, false);
}

Tensor sample_latent(const ModelSpec& gen_spec, std::size_t n, Rng& rng) {
    require(gen_spec.role == ModelRole::generator, Errc::invalid_argument,
            "sample_latent: spec is not a generator");
    Tensor z({n, gen_spec.latent_dim});
    if (gen_spec.latent_prior == LatentPrior::normal) {
        for (double& v : z.data()) v = rng.normal();
    } else {
        for (double& v : z.data()) v = rng.uniform(-1.0, 1.0);
    }
    return z;
}

GraphModel bind_model(Graph& g, const Model& m, bool trainable) {
    GraphModel gm;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (trainable) {
            gm.weights.push_back(g.leaf(m.weights[i]));
            gm.biases.push_back(g.leaf(m.biases[i]));
        } else {
            gm.weights.push_back(g.constant(m.weights[i]));
            gm.biases.push_back(g.constant(m.biases[i]));
        }
    }
    return gm;
}

Value forward_pre_final(Graph& g, const GraphModel& gm, const ModelSpec& spec, Value x) {
    Value h = x;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        h = g.add_row(g.matmul(h, gm.weights[i]), gm.biases[i]);
        if (i + 1 == spec.layers.size()) break;
        switch (spec.layers[i].act) {
            case Activation::relu: h = g.relu(h); break;
            case Activation::sigmoid: h = g.sigmoid(h); break;
            case Activation::tanh: h = g.tanh(h); break;
            case Activation::linear: break;
            case Activation::softmax_output:
                raise(Errc::invalid_argument, "softmax-output inside hidden layers");
        }
    }
    return h;
}

Value apply_final_activation(Graph& g, const ModelSpec& spec, Value pre) {
    switch (spec.layers.back().act) {
        case Activation::sigmoid: return g.sigmoid(pre);
        case Activation::tanh: return g.tanh(pre);
        case Activation::linear: return pre;
        case Activation::relu: return g.relu(pre);
        case Activation::softmax_output:
            raise(Errc::invalid_argument,
                  "softmax output is fused into the loss; no standalone graph op");
    }
    return pre;
}

// ---- serialization ----

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64le(out, bits);
}

class Cursor {
public:
    Cursor(const std::string& buf) : buf_(buf) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() {
        std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        require(pos_ + n <= buf_.size(), Errc::truncated,
                "model file truncated (wanted " + std::to_string(n) + " bytes at offset " +
                    std::to_string(pos_) + ")");
    }

    const std::string& buf_;
    std::size_t pos_ = 0;
};

std::string spec_header_text(const Model& m) {
    std::vector<KvEntry> kv;
    const ModelSpec& s = m.spec;
    kv.push_back({"model", "role", role_name(s.role)});
    kv.push_back({"model", "layer_count", std::to_string(s.layers.size())});
    kv.push_back({"model", "latent_dim", std::to_string(s.latent_dim)});
    kv.push_back({"model", "latent_prior", prior_name(s.latent_prior)});
    kv.push_back({"model", "input_range", s.input_range});
    kv.push_back({"model", "output_range", s.output_range});
    kv.push_back({"model", "seed", std::to_string(m.prov.seed)});
    kv.push_back({"model", "dataset", m.prov.dataset});
    kv.push_back({"model", "epochs", std::to_string(m.prov.epochs)});
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        std::string sec = "layer " + std::to_string(i);
        kv.push_back({sec, "in", std::to_string(s.layers[i].in)});
        kv.push_back({sec, "out", std::to_string(s.layers[i].out)});
        kv.push_back({sec, "activation", activation_name(s.layers[i].act)});
    }
    return format_kv_text(kv);
}

Model model_from_header(const std::string& text) {
    auto kv = parse_kv_text(text, Errc::format);
    auto get = [&](const std::string& sec, const std::string& key) -> std::string {
        for (const auto& e : kv)
            if (e.section == sec && e.key == key) return e.value;
        raise(Errc::format, "model header missing " + sec + "." + key);
    };
    Model m;
    m.spec.role = role_from_string(get("model", "role"));
    std::size_t nlayers = std::stoul(get("model", "layer_count"));
    require(nlayers > 0 && nlayers < 1000, Errc::format, "implausible layer count in header");
    m.spec.latent_dim = std::stoul(get("model", "latent_dim"));
    m.spec.latent_prior = prior_from_string(get("model", "latent_prior"));
    m.spec.input_range = get("model", "input_range");
    m.spec.output_range = get("model", "output_range");
    m.prov.seed = std::stoull(get("model", "seed"));
    m.prov.dataset = get("model", "dataset");
    m.prov.epochs = static_cast<std::uint32_t>(std::stoul(get("model", "epochs")));
    for (std::size_t i = 0; i < nlayers; ++i) {
        std::string sec = "layer " + std::to_string(i);
        LayerSpec l;
        l.in = std::stoul(get(sec, "in"));
        l.out = std::stoul(get(sec, "out"));
        l.act = activation_from_string(get(sec, "activation"));
        m.spec.layers.push_back(l);
    }
    return m;
}

} // namespace

void save_model(const Model& m, const std::string& path) {
    m.validate();
    std::string out;
    out.append(kModelMagic, 8);
    put_u32le(out, kModelFormatVersion);

    std::string header = spec_header_text(m);
    put_u64le(out, header.size());
    out += header;

    std::string blobs;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        for (double v : m.weights[i].data()) put_f64le(blobs, v);
        for (double v : m.biases[i].data()) put_f64le(blobs, v);
    }
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(blobs.data()), static_cast<uInt>(blobs.size())));
    out += blobs;
    put_u32le(out, crc);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), Errc::io, "cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    require(f.good(), Errc::io, "write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io, "cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    std::string buf = ss.str();

    Cursor cur(buf);
    std::string magic = cur.bytes(8);
    require(std::memcmp(magic.data(), kModelMagic, 8) == 0, Errc::format,
            "'" + path + "' is not a model file (bad magic)");
    std::uint32_t version = cur.u32();
    require(version == kModelFormatVersion, Errc::version,
            "model format version " + std::to_string(version) + " is not supported (this build reads version " +
                std::to_string(kModelFormatVersion) + ")");

    std::uint64_t hlen = cur.u64();
    require(hlen < (1ULL << 20), Errc::format, "implausible header length");
    std::string header = cur.bytes(hlen);
    Model m = model_from_header(header);

    const std::size_t blob_start = cur.pos();
    for (const LayerSpec& l : m.spec.layers) {
        Tensor w({l.in, l.out});
        for (double& v : w.data()) v = cur.f64();
        m.weights.push_back(std::move(w));
        Tensor b({l.out});
        for (double& v : b.data()) v = cur.f64();
        m.biases.push_back(std::move(b));
    }
    const std::size_t blob_end = cur.pos();
    std::uint32_t stored_crc = cur.u32();
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data() + blob_start),
              static_cast<uInt>(blob_end - blob_start)));
    require(crc == stored_crc, Errc::checksum, "model parameter checksum mismatch in '" + path + "'");

    m.validate();
    return m;
}

} // namespace minv
