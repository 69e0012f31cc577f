#include "train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rng.hpp"

namespace minv {

GenLossMode gen_loss_from_string(const std::string& s) {
    if (s == "non-saturating") return GenLossMode::non_saturating;
    if (s == "minimax") return GenLossMode::minimax;
    raise(Errc::config, "unknown generator loss '" + s + "' (expected non-saturating or minimax)");
}

const char* gen_loss_name(GenLossMode m) {
    return m == GenLossMode::non_saturating ? "non-saturating" : "minimax";
}

void TrainConfig::validate(std::size_t dataset_size) const {
    require(epochs >= 0, Errc::invalid_argument, "epochs must be >= 0");
    require(batch >= 1, Errc::invalid_argument, "batch size must be >= 1");
    require(batch <= dataset_size, Errc::invalid_argument,
            "batch size " + std::to_string(batch) + " exceeds dataset size " +
                std::to_string(dataset_size));
    require(disc_steps >= 1, Errc::invalid_argument, "disc_steps must be >= 1");
}

Tensor one_hot_rows(const std::vector<std::int32_t>& labels, std::size_t classes) {
    Tensor y({labels.size(), classes});
    auto d = y.data();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
                Errc::invalid_argument, "label out of range for one-hot encoding");
        d[i * classes + labels[i]] = 1.0;
    }
    return y;
}

GanObjective gan_objective(const Tensor& d_real, const Tensor& d_fake, GenLossMode mode) {
    require(d_real.size() >= 1 && d_fake.size() >= 1, Errc::invalid_argument,
            "gan_objective: empty score tensors");
    GanObjective out;
    auto clamped_log_mean = [&out](const Tensor& t, bool complement) {
        double s = 0.0;
        for (double v : t.data()) {
            require(v >= 0.0 && v <= 1.0, Errc::invalid_argument,
                    "gan_objective: discriminator scores must lie in [0,1]");
            double a = complement ? 1.0 - v : v;
            if (a < kGanLogEps) {
                a = kGanLogEps;
                out.clamped = true;
            }
            s += std::log(a);
        }
        return s / static_cast<double>(t.size());
    };
    const double log_real = clamped_log_mean(d_real, false);
    const double log_one_minus_fake = clamped_log_mean(d_fake, true);
    out.d_loss = -log_real - log_one_minus_fake;
    out.g_loss = mode == GenLossMode::minimax ? log_one_minus_fake
                                              : -clamped_log_mean(d_fake, false);
    return out;
}

bool smoothed_loss_non_increasing(const std::vector<double>& losses) {
    if (losses.size() < 2) return true;
    std::vector<double> ma;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const std::size_t lo = i >= 4 ? i - 4 : 0;
        double s = 0.0;
        for (std::size_t j = lo; j <= i; ++j) s += losses[j];
        ma.push_back(s / static_cast<double>(i - lo + 1));
    }
    for (std::size_t i = 1; i < ma.size(); ++i)
        if (ma[i] > ma[i - 1] * 1.10 + 1e-12) return false;
    return true;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> which) {
    const std::size_t d = src.cols();
    Tensor out({which.size(), d});
    auto s = src.data();
    auto o = out.data();
    for (std::size_t k = 0; k < which.size(); ++k)
        std::copy(s.begin() + which[k] * d, s.begin() + (which[k] + 1) * d, o.begin() + k * d);
    return out;
}

std::vector<Tensor> collect_params(const Model& m) {
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        out.push_back(m.weights[i]);
        out.push_back(m.biases[i]);
    }
    return out;
}

void scatter_params(Model& m, const std::vector<Tensor>& params) {
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        m.weights[i] = params[2 * i];
        m.biases[i] = params[2 * i + 1];
    }
}

std::vector<Value> bind_trainable(Graph& g, const std::vector<Tensor>& params) {
    std::vector<Value> out;
    out.reserve(params.size());
    for (const Tensor& p : params) out.push_back(g.leaf(p));
    return out;
}

GraphModel as_graph_model(const std::vector<Value>& vals) {
    GraphModel gm;
    for (std::size_t i = 0; i + 1 < vals.size(); i += 2) {
        gm.weights.push_back(vals[i]);
        gm.biases.push_back(vals[i + 1]);
    }
    return gm;
}

} // namespace

std::pair<Model, TrainReport> train_classifier(const Dataset& data, const ModelSpec& spec,
                                               const TrainConfig& cfg) {
    require(data.size() > 0, Errc::invalid_argument, "train_classifier: empty dataset");
    spec.validate();
    require(spec.role == ModelRole::classifier, Errc::invalid_argument,
            "train_classifier: spec is not a classifier");
    require(spec.output_size() == data.class_count(), Errc::invalid_argument,
            "classifier output size " + std::to_string(spec.output_size()) +
                " does not match dataset class count " + std::to_string(data.class_count()));
    require(spec.input_size() == data.dim(), Errc::shape_mismatch,
            "classifier input size does not match image dimension");
    cfg.validate(data.size());

    const auto t0 = std::chrono::steady_clock::now();
    Model model = build_model(spec, derive_seed(cfg.seed, "classifier-init"));
    model.prov.dataset = data.provenance_id();
    model.prov.epochs = static_cast<std::uint32_t>(cfg.epochs);

    std::vector<Tensor> params = collect_params(model);
    Optimizer opt(cfg.opt);
    Rng shuffle_rng(derive_seed(cfg.seed, "classifier-shuffle"));

    TrainReport report;
    const std::size_t k = data.class_count();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffled_indices(data.size(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t seen = 0, correct = 0;
        for (std::size_t off = 0; off + cfg.batch <= order.size(); off += cfg.batch) {
            std::span<const std::size_t> which(order.data() + off, cfg.batch);
            Tensor xb = gather_rows(data.images, which);
            std::vector<std::int32_t> yb(cfg.batch);
            for (std::size_t i = 0; i < cfg.batch; ++i) yb[i] = data.labels[which[i]];

            Graph g;
            auto leaves = bind_trainable(g, params);
            Value x = g.constant(xb);
            Value logits = forward_pre_final(g, as_graph_model(leaves), spec, x);
            Value loss = g.softmax_ce(logits, one_hot_rows(yb, k));

            // running training accuracy from the pre-update forward pass
            const Tensor& lv = g.value(logits);
            for (std::size_t i = 0; i < cfg.batch; ++i) {
                std::size_t arg = 0;
                for (std::size_t j = 1; j < k; ++j)
                    if (lv.at(i, j) > lv.at(i, arg)) arg = j;
                if (static_cast<std::int32_t>(arg) == yb[i]) ++correct;
            }

            loss_sum += g.value(loss).item() * static_cast<double>(cfg.batch);
            seen += cfg.batch;

            auto grads = g.grad(loss, leaves);
            opt.step(params, grads);
        }
        EpochStats es;
        es.loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        es.accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
        report.classifier_curve.push_back(es);
    }

    scatter_params(model, params);
    model.validate();

    std::vector<double> losses;
    for (const auto& e : report.classifier_curve) losses.push_back(e.loss);
    report.loss_smooth_ok = smoothed_loss_non_increasing(losses);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

double classifier_accuracy(const Model& m, const Dataset& data) {
    require(data.size() > 0, Errc::invalid_argument, "classifier_accuracy: empty dataset");
    Tensor probs = infer(m, data.images);
    const std::size_t k = probs.cols();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (probs.at(i, j) > probs.at(i, arg)) arg = j;
        if (static_cast<std::int32_t>(arg) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::pair<GanModels, TrainReport> train_gan(const Dataset& data, const ModelSpec& gen_spec,
                                            const ModelSpec& disc_spec, const TrainConfig& cfg) {
    require(data.size() > 0, Errc::invalid_argument, "train_gan: empty dataset");
    gen_spec.validate();
    disc_spec.validate();
    require(gen_spec.role == ModelRole::generator && disc_spec.role == ModelRole::discriminator,
            Errc::invalid_argument, "train_gan: specs must be generator + discriminator");
    require(gen_spec.output_size() == data.dim(), Errc::shape_mismatch,
            "generator output size does not match image dimension");
    require(disc_spec.input_size() == data.dim(), Errc::shape_mismatch,
            "discriminator input size does not match image dimension");
    cfg.validate(data.size());

    const auto t0 = std::chrono::steady_clock::now();
    GanModels models{build_model(gen_spec, derive_seed(cfg.seed, "gen-init")),
                     build_model(disc_spec, derive_seed(cfg.seed, "disc-init"))};
    models.generator.prov.dataset = data.provenance_id();
    models.discriminator.prov.dataset = data.provenance_id();
    models.generator.prov.epochs = static_cast<std::uint32_t>(cfg.epochs);
    models.discriminator.prov.epochs = static_cast<std::uint32_t>(cfg.epochs);

    std::vector<Tensor> gparams = collect_params(models.generator);
    std::vector<Tensor> dparams = collect_params(models.discriminator);
    Optimizer gopt(cfg.opt);
    Optimizer dopt(cfg.disc_opt);
    Rng shuffle_rng(derive_seed(cfg.seed, "gan-shuffle"));
    Rng z_rng(derive_seed(cfg.seed, "gan-latent"));

    TrainReport report;
    report.gen_loss = cfg.gen_loss;

    auto sync_models = [&] {
        scatter_params(models.generator, gparams);
        scatter_params(models.discriminator, dparams);
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto order = shuffled_indices(data.size(), shuffle_rng);
        GanEpochStats es;
        std::size_t d_updates = 0, g_updates = 0, score_batches = 0;
        try {
            std::size_t batch_index = 0;
            for (std::size_t off = 0; off + cfg.batch <= order.size();
                 off += cfg.batch, ++batch_index) {
                std::span<const std::size_t> which(order.data() + off, cfg.batch);
                Tensor x_real = gather_rows(data.images, which);

                // discriminator update
                {
                    scatter_params(models.generator, gparams);
                    Tensor z = sample_latent(gen_spec, cfg.batch, z_rng);
                    Tensor x_fake = infer(models.generator, z);

                    Graph g;
                    auto dleaves = bind_trainable(g, dparams);
                    GraphModel dm = as_graph_model(dleaves);
                    Value real = g.constant(x_real);
                    Value fake = g.constant(x_fake);
                    Value d_real = g.sigmoid(forward_pre_final(g, dm, disc_spec, real));
                    Value d_fake = g.sigmoid(forward_pre_final(g, dm, disc_spec, fake));
                    Value loss = g.neg(
                        g.add(g.mean(g.log(g.clamp_min(d_real, kGanLogEps))),
                              g.mean(g.log(g.clamp_min(g.rsub(1.0, d_fake), kGanLogEps)))));

                    const Tensor& dr = g.value(d_real);
                    const Tensor& df = g.value(d_fake);
                    if (dr.min() <= kGanLogEps || df.max() >= 1.0 - kGanLogEps)
                        ++report.clamp_events;
                    es.d_real_mean += dr.sum() / static_cast<double>(dr.size());
                    es.d_fake_mean += df.sum() / static_cast<double>(df.size());
                    ++score_batches;

                    es.d_loss += g.value(loss).item();
                    ++d_updates;
                    auto grads = g.grad(loss, dleaves);
                    dopt.step(dparams, grads);
                }

                // generator update every disc_steps batches
                if (batch_index % static_cast<std::size_t>(cfg.disc_steps) ==
                    static_cast<std::size_t>(cfg.disc_steps) - 1) {
                    scatter_params(models.discriminator, dparams);
                    Tensor z = sample_latent(gen_spec, cfg.batch, z_rng);

                    Graph g;
                    auto gleaves = bind_trainable(g, gparams);
                    GraphModel gm = as_graph_model(gleaves);
                    GraphModel dm = bind_model(g, models.discriminator, false);
                    Value zv = g.constant(z);
                    Value x = apply_final_activation(
                        g, gen_spec, forward_pre_final(g, gm, gen_spec, zv));
                    Value d = g.sigmoid(forward_pre_final(g, dm, disc_spec, x));
                    Value loss =
                        cfg.gen_loss == GenLossMode::minimax
                            ? g.mean(g.log(g.clamp_min(g.rsub(1.0, d), kGanLogEps)))
                            : g.neg(g.mean(g.log(g.clamp_min(d, kGanLogEps))));

                    if (g.value(d).max() >= 1.0 - kGanLogEps || g.value(d).min() <= kGanLogEps)
                        ++report.clamp_events;
                    es.g_loss += g.value(loss).item();
                    ++g_updates;
                    auto grads = g.grad(loss, gleaves);
                    gopt.step(gparams, grads);
                }
            }
        } catch (const Error& e) {
            if (e.code() != Errc::numeric) throw;
            report.aborted = true;
            report.abort_reason = e.what();
        }
        if (d_updates) {
            es.d_loss /= static_cast<double>(d_updates);
            es.d_real_mean /= static_cast<double>(score_batches);
            es.d_fake_mean /= static_cast<double>(score_batches);
        }
        if (g_updates) es.g_loss /= static_cast<double>(g_updates);
        report.gan_curve.push_back(es);
        if (report.aborted) break;
    }

    sync_models();
    models.generator.validate();
    models.discriminator.validate();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(models), std::move(report)};
}

} // namespace minv
