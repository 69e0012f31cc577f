#include "pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csv.hpp"
#include "image_io.hpp"
#include "rng.hpp"

namespace fs = std::filesystem;

namespace minv {

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void prepare_outdir(const Config& cfg, const std::string& outdir) {
    std::error_code ec;
    fs::create_directories(outdir, ec);
    require(!ec, Errc::io, "cannot create output directory '" + outdir + "'");
    cfg.write_echo(join(outdir, "config-echo.txt"));
}

OptimizerConfig optimizer_from(const Config& cfg, const std::string& section) {
    OptimizerConfig o;
    o.kind = opt_kind_from_string(cfg.get(section + ".optimizer"));
    o.lr = cfg.get_double(section + ".lr");
    if (section != "attack") {
        o.beta1 = cfg.get_double(section + ".beta1");
        o.beta2 = cfg.get_double(section + ".beta2");
    }
    return o;
}

std::pair<std::size_t, std::size_t> image_dims_for(std::size_t dim, const Dataset* d) {
    if (d && d->dim() == dim && d->rows >= 2) return {d->rows, d->cols};
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (side * side == dim && side >= 2) return {side, side};
    return {0, 0};
}

void write_result_image(const InversionResult& res, const Dataset* data,
                        const std::string& path) {
    auto [h, w] = image_dims_for(res.x.size(), data);
    if (h == 0) {
        std::cerr << "[minv] result is not an image (dim " << res.x.size()
                  << "), skipping PGM\n";
        return;
    }
    write_pgm_grid(res.x, h, w, 1, path);
}

void write_trace_csv(const InversionResult& res, const std::string& path) {
    CsvWriter csv(path, {"iteration", "loss", "confidence"});
    for (const IterRecord& r : res.trace)
        csv.row({CsvWriter::num(r.iter), CsvWriter::num(r.loss), CsvWriter::num(r.confidence)});
    csv.close();
}

void write_summary(const InversionResult& res, const std::string& mode_name,
                   const std::string& path) {
    std::vector<KvEntry> kv;
    const AttackConfig& c = res.config;
    kv.push_back({"attack", "mode", mode_name});
    kv.push_back({"attack", "class", std::to_string(c.target_class)});
    kv.push_back({"attack", "lambda", CsvWriter::num(c.lambda)});
    kv.push_back({"attack", "p", c.p == 0 ? "none" : std::to_string(c.p)});
    kv.push_back({"attack", "optimizer", opt_kind_name(c.opt.kind)});
    kv.push_back({"attack", "lr", CsvWriter::num(c.opt.lr)});
    kv.push_back({"attack", "iters", std::to_string(c.max_iters)});
    kv.push_back({"attack", "restarts", std::to_string(c.restarts)});
    kv.push_back({"attack", "seed", std::to_string(c.seed)});
    kv.push_back({"attack", "newton", c.second_order ? "true" : "false"});
    if (c.second_order)
        kv.push_back({"attack", "cg_damping", CsvWriter::num(c.cg.damping)});
    kv.push_back({"result", "loss", CsvWriter::num(res.loss)});
    kv.push_back({"result", "confidence", CsvWriter::num(res.confidence)});
    kv.push_back({"result", "winning_restart", std::to_string(res.winning_restart)});
    kv.push_back({"result", "restarts_failed", std::to_string(res.restarts_failed)});
    kv.push_back({"result", "iterations", std::to_string(res.trace.size())});
    if (res.nn_distance >= 0.0)
        kv.push_back({"result", "nn_distance", CsvWriter::num(res.nn_distance)});
    if (res.newton.attempted) {
        kv.push_back({"newton", "accepted", res.newton.accepted ? "true" : "false"});
        kv.push_back({"newton", "loss_before", CsvWriter::num(res.newton.diag.loss_before)});
        kv.push_back({"newton", "loss_after", CsvWriter::num(res.newton.diag.loss_after)});
        kv.push_back({"newton", "cg_iterations", std::to_string(res.newton.diag.cg.iterations)});
        kv.push_back({"newton", "cg_residual", CsvWriter::num(res.newton.diag.cg.residual)});
        kv.push_back(
            {"newton", "cg_converged", res.newton.diag.cg.converged ? "true" : "false"});
    }
    std::ofstream f(path, std::ios::trunc);
    require(f.good(), Errc::io, "cannot write summary '" + path + "'");
    f << format_kv_text(kv);
}

void write_classifier_csv(const TrainReport& rep, const std::string& path) {
    CsvWriter csv(path, {"epoch", "loss", "accuracy"});
    for (std::size_t i = 0; i < rep.classifier_curve.size(); ++i)
        csv.row({CsvWriter::num(i), CsvWriter::num(rep.classifier_curve[i].loss),
                 CsvWriter::num(rep.classifier_curve[i].accuracy)});
    csv.close();
}

void write_gan_csv(const TrainReport& rep, const std::string& path) {
    CsvWriter csv(path, {"epoch", "d_loss", "g_loss", "d_real_mean", "d_fake_mean"});
    for (std::size_t i = 0; i < rep.gan_curve.size(); ++i) {
        const GanEpochStats& e = rep.gan_curve[i];
        csv.row({CsvWriter::num(i), CsvWriter::num(e.d_loss), CsvWriter::num(e.g_loss),
                 CsvWriter::num(e.d_real_mean), CsvWriter::num(e.d_fake_mean)});
    }
    csv.close();
}

Model load_model_from(const Config& cfg, const std::string& key) {
    const std::string path = cfg.get(key);
    require(!path.empty(), Errc::config, "'" + key + "' is not set");
    return load_model(path);
}

} // namespace

Dataset resolve_dataset(const Config& cfg, bool apply_keep) {
    const std::string source = cfg.get("data.source");
    Dataset d;
    if (source == "glyphs") {
        d = synth_glyphs(static_cast<std::size_t>(cfg.get_int("data.glyph_classes")),
                         static_cast<std::size_t>(cfg.get_int("data.glyph_per_class")),
                         static_cast<std::size_t>(cfg.get_int("data.glyph_size")),
                         derive_seed(cfg.get_u64("run.seed"), "data"));
    } else if (source == "idx") {
        d = load_idx(cfg.get("data.idx_images"), cfg.get("data.idx_labels"));
        if (cfg.has("data.idx_images2"))
            d = merge(d, load_idx(cfg.get("data.idx_images2"), cfg.get("data.idx_labels2")));
    } else if (source == "modes") {
        d = synth_modes({{-1.0, 0.0}, {1.0, 0.0}}, 1000, 0.05,
                        derive_seed(cfg.get_u64("run.seed"), "data"));
    } else {
        raise(Errc::config, "data.source must be glyphs, idx or modes (got '" + source + "')");
    }
    if (apply_keep) {
        auto keep = cfg.get_int_list("data.keep");
        if (!keep.empty()) d = subset_classes(d, keep, cfg.get_bool("data.relabel"));
    }
    return d;
}

ModelSpec classifier_spec_from(const Config& cfg, std::size_t dim, std::size_t classes) {
    return ModelSpec::dense(ModelRole::classifier,
                            {dim, static_cast<std::size_t>(cfg.get_int("classifier.hidden")),
                             classes},
                            Activation::relu);
}

ModelSpec generator_spec_from(const Config& cfg, std::size_t dim, bool unit_range_images) {
    ModelSpec s = ModelSpec::dense(ModelRole::generator,
                                   {static_cast<std::size_t>(cfg.get_int("gan.latent")),
                                    static_cast<std::size_t>(cfg.get_int("gan.hidden")), dim},
                                   Activation::relu);
    s.latent_prior = prior_from_string(cfg.get("gan.prior"));
    if (!unit_range_images) {
        // non-pixel data (2-D modes): tanh output covers negative coordinates
        s.layers.back().act = Activation::tanh;
        s.output_range = "[-1,1]";
    }
    return s;
}

ModelSpec discriminator_spec_from(const Config& cfg, std::size_t dim) {
    return ModelSpec::dense(ModelRole::discriminator,
                            {dim, static_cast<std::size_t>(cfg.get_int("gan.hidden")), 1},
                            Activation::relu);
}

TrainConfig classifier_train_config(const Config& cfg) {
    TrainConfig t;
    t.epochs = cfg.get_int("classifier.epochs");
    t.batch = static_cast<std::size_t>(cfg.get_int("classifier.batch"));
    t.seed = cfg.get_u64("run.seed");
    t.opt = optimizer_from(cfg, "classifier");
    return t;
}

TrainConfig gan_train_config(const Config& cfg) {
    TrainConfig t;
    t.epochs = cfg.get_int("gan.epochs");
    t.batch = static_cast<std::size_t>(cfg.get_int("gan.batch"));
    t.seed = cfg.get_u64("run.seed");
    t.opt = optimizer_from(cfg, "gan");
    t.disc_opt = t.opt;
    if (cfg.has("gan.disc_lr")) t.disc_opt.lr = cfg.get_double("gan.disc_lr");
    t.disc_steps = cfg.get_int("gan.disc_steps");
    t.gen_loss = gen_loss_from_string(cfg.get("gan.gen_loss"));
    return t;
}

AttackConfig attack_config_from(const Config& cfg) {
    AttackConfig a;
    a.mode = attack_mode_from_string(cfg.get("attack.mode"));
    a.target_class = cfg.get_int("attack.class");
    a.lambda = cfg.get_double("attack.lambda");
    const std::string p = cfg.get("attack.p");
    a.p = (p == "none" || p.empty()) ? 0 : cfg.get_int("attack.p");
    const std::string reg = cfg.get("attack.regularize");
    require(reg == "z" || reg == "image", Errc::config,
            "attack.regularize must be z or image");
    a.regularize_image = reg == "image";
    a.opt = optimizer_from(cfg, "attack");
    a.max_iters = cfg.get_int("attack.iters");
    a.tol = cfg.get_double("attack.tol");
    a.patience = cfg.get_int("attack.patience");
    a.restarts = cfg.get_int("attack.restarts");
    a.seed = cfg.get_u64("run.seed");
    a.second_order = cfg.get_bool("attack.newton");
    a.cg.tol = cfg.get_double("attack.cg_tol");
    a.cg.max_iters = cfg.get_int("attack.cg_iters");
    a.cg.damping = cfg.get_double("attack.cg_damping");
    a.parallel = cfg.get_int("run.parallel");
    a.validate();
    return a;
}

void run_train_target(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Dataset data = resolve_dataset(cfg, true);
    std::cerr << "[minv] training target on " << data.size() << " samples, "
              << data.class_count() << " classes\n";
    ModelSpec spec = classifier_spec_from(cfg, data.dim(), data.class_count());
    auto [model, report] = train_classifier(data, spec, classifier_train_config(cfg));
    save_model(model, join(outdir, "target.model"));
    write_classifier_csv(report, join(outdir, "train-target.csv"));
    std::cerr << "[minv] target accuracy " << classifier_accuracy(model, data) << ", "
              << report.wall_seconds << " s"
              << (report.loss_smooth_ok ? "" : " (warning: loss curve not smooth)") << "\n";
}

void run_train_gan(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Dataset data = resolve_dataset(cfg, false);
    std::cerr << "[minv] training GAN on " << data.size() << " samples\n";
    ModelSpec gen = generator_spec_from(cfg, data.dim(), data.unit_range);
    ModelSpec disc = discriminator_spec_from(cfg, data.dim());
    auto [models, report] = train_gan(data, gen, disc, gan_train_config(cfg));
    require(!report.aborted, Errc::numeric, "GAN training diverged: " + report.abort_reason);
    save_model(models.generator, join(outdir, "generator.model"));
    save_model(models.discriminator, join(outdir, "discriminator.model"));
    write_gan_csv(report, join(outdir, "train-gan.csv"));
    if (!report.gan_curve.empty())
        std::cerr << "[minv] GAN " << gen_loss_name(report.gen_loss) << " loss, final d_fake "
                  << report.gan_curve.back().d_fake_mean << ", clamp events "
                  << report.clamp_events << ", " << report.wall_seconds << " s\n";
}

namespace {

InversionResult run_single_attack(const Config& cfg, const Model& target,
                                  const Model* generator, AttackConfig acfg,
                                  const Dataset* nn_data) {
    InversionResult res = acfg.mode == AttackMode::latent
                              ? invert_latent(target, *generator, acfg)
                              : invert_direct(target, acfg);
    if (nn_data)
        res.nn_distance =
            nearest_sample_distance(*nn_data, static_cast<std::int32_t>(acfg.target_class),
                                    res.x);
    (void)cfg;
    return res;
}

} // namespace

void run_invert(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Model target = load_model_from(cfg, "models.target");
    AttackConfig acfg = attack_config_from(cfg);

    Model generator;
    if (acfg.mode == AttackMode::latent) generator = load_model_from(cfg, "models.generator");

    Dataset nn_data;
    bool have_nn = false;
    if (cfg.get_bool("attack.nn_distance")) {
        nn_data = resolve_dataset(cfg, true);
        have_nn = nn_data.dim() == target.spec.input_size();
        if (!have_nn)
            std::cerr << "[minv] dataset dimension does not match target input; "
                         "skipping nn distance\n";
    }

    std::cerr << "[minv] inverting class " << acfg.target_class << " ("
              << attack_mode_name(acfg.mode) << " mode)\n";
    InversionResult res =
        run_single_attack(cfg, target, acfg.mode == AttackMode::latent ? &generator : nullptr,
                          acfg, have_nn ? &nn_data : nullptr);

    const std::string stem = std::string("invert-") + attack_mode_name(acfg.mode) + "-class" +
                             std::to_string(acfg.target_class);
    write_result_image(res, have_nn ? &nn_data : nullptr, join(outdir, stem + ".pgm"));
    write_trace_csv(res, join(outdir, stem + "-trace.csv"));
    write_summary(res, attack_mode_name(acfg.mode), join(outdir, stem + "-summary.txt"));
    std::cerr << "[minv] confidence " << res.confidence << ", loss " << res.loss << "\n";
}

void run_sweep_p(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Model target = load_model_from(cfg, "models.target");
    AttackConfig base = attack_config_from(cfg);
    Model generator;
    const Model* gen_ptr = nullptr;
    if (base.mode == AttackMode::latent) {
        generator = load_model_from(cfg, "models.generator");
        gen_ptr = &generator;
    }

    Dataset nn_data;
    bool have_nn = false;
    if (cfg.get_bool("attack.nn_distance")) {
        nn_data = resolve_dataset(cfg, true);
        have_nn = nn_data.dim() == target.spec.input_size();
    }

    std::cerr << "[minv] sweeping p over {none, 1..6}\n";
    auto cells = sweep_p(target, gen_ptr, base);

    CsvWriter csv(join(outdir, "sweep-p.csv"),
                  {"p", "status", "loss", "confidence", "iterations", "nn_distance"});
    for (auto& cell : cells) {
        std::string pname = cell.p == 0 ? "none" : std::to_string(cell.p);
        if (cell.ok && have_nn)
            cell.result.nn_distance = nearest_sample_distance(
                nn_data, static_cast<std::int32_t>(base.target_class), cell.result.x);
        csv.row({pname, cell.ok ? "ok" : "error",
                 cell.ok ? CsvWriter::num(cell.result.loss) : "",
                 cell.ok ? CsvWriter::num(cell.result.confidence) : "",
                 cell.ok ? CsvWriter::num(cell.result.trace.size()) : "",
                 cell.ok && cell.result.nn_distance >= 0.0
                     ? CsvWriter::num(cell.result.nn_distance)
                     : ""});
        if (cell.ok)
            write_result_image(cell.result, have_nn ? &nn_data : nullptr,
                               join(outdir, "sweep-p-" + pname + ".pgm"));
        if (!cell.ok) std::cerr << "[minv] p=" << pname << " failed: " << cell.error << "\n";
    }
    csv.close();
}

void run_analyze_manifold(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Model generator = load_model_from(cfg, "models.generator");
    Dataset data = resolve_dataset(cfg, false);
    const std::uint64_t seed = cfg.get_u64("run.seed");
    const std::size_t pairs = static_cast<std::size_t>(cfg.get_int("manifold.pairs"));

    std::cerr << "[minv] estimating Lipschitz constant over " << pairs << " pairs\n";
    LipschitzReport lip = estimate_lipschitz(generator, pairs, derive_seed(seed, "lipschitz"));

    const auto class_a = static_cast<std::int32_t>(cfg.get_int("manifold.class_a"));
    const auto class_b = static_cast<std::int32_t>(cfg.get_int("manifold.class_b"));
    const std::size_t cap = static_cast<std::size_t>(cfg.get_int("manifold.samples_per_class"));

    auto take_class = [&](std::int32_t label) {
        auto idx = data.class_indices(label);
        require(!idx.empty(), Errc::invalid_argument,
                "no samples for class " + std::to_string(label));
        if (idx.size() > cap) idx.resize(cap);
        Tensor out({idx.size(), data.dim()});
        auto src = data.images.data();
        auto dst = out.data();
        for (std::size_t k = 0; k < idx.size(); ++k)
            std::copy(src.begin() + idx[k] * data.dim(), src.begin() + (idx[k] + 1) * data.dim(),
                      dst.begin() + k * data.dim());
        return out;
    };

    Tensor pa = take_class(class_a);
    Tensor pb = take_class(class_b);
    ManifoldGapReport gap;
    gap.class_a = class_a;
    gap.class_b = class_b;
    gap.count_a = pa.rows();
    gap.count_b = pb.rows();
    gap.beta_upper = lip.beta_upper;
    gap.gamma = manifold_gap(pa, pb);
    gap.latent_gap_bound = latent_gap_bound(gap.gamma, lip.beta_upper);

    const std::size_t violations = count_gap_bound_violations(
        generator, gap.gamma, lip.beta_upper, pairs, derive_seed(seed, "lipschitz"));

    std::vector<KvEntry> kv;
    kv.push_back({"lipschitz", "beta_empirical", CsvWriter::num(lip.beta_empirical)});
    kv.push_back({"lipschitz", "beta_upper", CsvWriter::num(lip.beta_upper)});
    kv.push_back({"lipschitz", "pairs", std::to_string(lip.pairs)});
    kv.push_back({"lipschitz", "sampler", lip.sampler});
    kv.push_back({"lipschitz", "seed", std::to_string(lip.seed)});
    kv.push_back({"lipschitz", "norms", "l2 in both spaces, prior effective support"});
    kv.push_back({"gap", "class_a", data.class_names[class_a]});
    kv.push_back({"gap", "class_b", data.class_names[class_b]});
    kv.push_back({"gap", "samples_a", std::to_string(gap.count_a)});
    kv.push_back({"gap", "samples_b", std::to_string(gap.count_b)});
    kv.push_back({"gap", "gamma", CsvWriter::num(gap.gamma)});
    kv.push_back({"gap", "latent_gap_bound", CsvWriter::num(gap.latent_gap_bound)});
    kv.push_back({"gap", "bound_violations", std::to_string(violations)});
    std::ofstream rep(join(outdir, "manifold-report.txt"), std::ios::trunc);
    require(rep.good(), Errc::io, "cannot write manifold report");
    rep << format_kv_text(kv);
    rep.close();

    CsvWriter csv(join(outdir, "manifold.csv"),
                  {"beta_empirical", "beta_upper", "gamma", "latent_gap_bound",
                   "bound_violations", "pairs"});
    csv.row({CsvWriter::num(lip.beta_empirical), CsvWriter::num(lip.beta_upper),
             CsvWriter::num(gap.gamma), CsvWriter::num(gap.latent_gap_bound),
             std::to_string(violations), std::to_string(lip.pairs)});
    csv.close();
    std::cerr << "[minv] beta_emp " << lip.beta_empirical << " <= beta_upper " << lip.beta_upper
              << ", gamma " << gap.gamma << ", bound " << gap.latent_gap_bound << "\n";
}

void run_interpolate(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    Model target = load_model_from(cfg, "models.target");
    Model generator = load_model_from(cfg, "models.generator");
    Model disc;
    bool have_disc = cfg.has("models.discriminator");
    if (have_disc) disc = load_model_from(cfg, "models.discriminator");

    const int class_a = cfg.get_int("manifold.class_a");
    const int class_b = cfg.get_int("manifold.class_b");
    AttackConfig acfg = attack_config_from(cfg);
    acfg.mode = AttackMode::latent;

    std::cerr << "[minv] inverting endpoint classes " << class_a << " and " << class_b << "\n";
    acfg.target_class = class_a;
    InversionResult ra = invert_latent(target, generator, acfg);
    acfg.target_class = class_b;
    InversionResult rb = invert_latent(target, generator, acfg);

    const auto steps = static_cast<std::size_t>(cfg.get_int("manifold.interp_steps"));
    InterpolationTrace tr =
        interpolate(generator, target, have_disc ? &disc : nullptr, ra.z, rb.z, steps);

    const std::string stem =
        "interp-class" + std::to_string(class_a) + "-class" + std::to_string(class_b);

    Dataset data = resolve_dataset(cfg, false);
    auto [h, w] = image_dims_for(generator.spec.output_size(), &data);
    if (h != 0) {
        Tensor strip({tr.steps.size(), generator.spec.output_size()});
        auto sd = strip.data();
        for (std::size_t k = 0; k < tr.steps.size(); ++k)
            std::copy(tr.steps[k].image.data().begin(), tr.steps[k].image.data().end(),
                      sd.begin() + k * generator.spec.output_size());
        write_pgm_grid(strip, h, w, tr.steps.size(), join(outdir, stem + ".pgm"));
    }

    CsvWriter csv(join(outdir, stem + ".csv"),
                  {"step", "t", "latent_step", "image_step", "argmax", "conf_class_a",
                   "conf_class_b", "disc_score"});
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
        const InterpolationStep& s = tr.steps[k];
        std::size_t arg = 0;
        for (std::size_t j = 1; j < s.confidences.size(); ++j)
            if (s.confidences[j] > s.confidences[arg]) arg = j;
        csv.row({CsvWriter::num(k), CsvWriter::num(s.t), CsvWriter::num(s.latent_step),
                 CsvWriter::num(s.image_step), CsvWriter::num(arg),
                 CsvWriter::num(s.confidences[class_a]), CsvWriter::num(s.confidences[class_b]),
                 s.disc_score >= 0.0 ? CsvWriter::num(s.disc_score) : ""});
    }
    csv.close();
}

void run_render(const Config& cfg, const std::string& outdir) {
    prepare_outdir(cfg, outdir);
    const std::string what = cfg.get("render.what");
    const auto count = static_cast<std::size_t>(cfg.get_int("render.count"));
    const auto cols = static_cast<std::size_t>(cfg.get_int("render.cols"));
    require(count >= 1 && cols >= 1, Errc::config, "render.count and render.cols must be >= 1");

    if (what == "generator") {
        Model generator = load_model_from(cfg, "models.generator");
        Rng rng(derive_seed(cfg.get_u64("run.seed"), "render"));
        Tensor z = sample_latent(generator.spec, count, rng);
        Tensor imgs = infer(generator, z);
        auto [h, w] = image_dims_for(generator.spec.output_size(), nullptr);
        require(h != 0, Errc::invalid_argument,
                "generator output is not renderable as square images");
        write_pgm_grid(imgs, h, w, cols, join(outdir, "render.pgm"));
    } else if (what == "dataset") {
        Dataset data = resolve_dataset(cfg, true);
        const std::size_t n = std::min(count, data.size());
        Tensor imgs({n, data.dim()});
        auto src = data.images.data();
        std::copy(src.begin(), src.begin() + n * data.dim(), imgs.data().begin());
        write_pgm_grid(imgs, data.rows, data.cols, cols, join(outdir, "render.pgm"));
    } else {
        raise(Errc::config, "render.what must be generator or dataset");
    }
}

void run_reproduce(const Config& cfg, const std::string& experiment, const std::string& outdir) {
    require(experiment == "synthetic" || experiment == "mnist-6of10" ||
                experiment == "fashion-5of10",
            Errc::config,
            "unknown experiment '" + experiment +
                "' (expected synthetic, mnist-6of10 or fashion-5of10)");
    prepare_outdir(cfg, outdir);
    const std::uint64_t seed = cfg.get_u64("run.seed");

    // assemble the superset corpus (GAN search space) and the target's subset
    Dataset superset, target_data;
    std::vector<std::int32_t> keep;
    if (experiment == "synthetic") {
        superset = synth_glyphs(static_cast<std::size_t>(cfg.get_int("data.glyph_classes")),
                                static_cast<std::size_t>(cfg.get_int("data.glyph_per_class")),
                                static_cast<std::size_t>(cfg.get_int("data.glyph_size")),
                                derive_seed(seed, "data"));
        keep = cfg.get_int_list("reproduce.keep");
        require(!keep.empty(), Errc::config, "reproduce.keep must list the trained classes");
    } else {
        const std::string imgs = cfg.get("data.idx_images");
        const std::string labels = cfg.get("data.idx_labels");
        require(fs::exists(imgs) && fs::exists(labels), Errc::io,
                "experiment " + experiment + " needs IDX corpora: expected image file '" + imgs +
                    "' and label file '" + labels +
                    "' (set data.idx_images / data.idx_labels)");
        Dataset corpus_a = load_idx(imgs, labels);
        Dataset corpus_b;
        if (cfg.has("data.idx_images2")) {
            corpus_b = load_idx(cfg.get("data.idx_images2"), cfg.get("data.idx_labels2"));
        } else {
            // second glyph family as the superset filler
            Dataset fam = synth_glyphs(20, static_cast<std::size_t>(
                                               cfg.get_int("data.glyph_per_class")),
                                       corpus_a.rows, derive_seed(seed, "data-b"));
            std::vector<std::int32_t> second;
            for (std::int32_t c = 10; c < 20; ++c) second.push_back(c);
            corpus_b = subset_classes(fam, second, true);
        }
        superset = merge(corpus_a, corpus_b);
        const int k = experiment == "mnist-6of10" ? 6 : 5;
        for (std::int32_t c = 0; c < k; ++c) keep.push_back(c);
        target_data = subset_classes(corpus_a, keep, true);
    }
    if (experiment == "synthetic") target_data = subset_classes(superset, keep, true);

    // 1. target classifier
    std::cerr << "[minv] [1/5] training target classifier (" << keep.size() << " classes)\n";
    ModelSpec cls_spec = classifier_spec_from(cfg, target_data.dim(), target_data.class_count());
    auto [target, cls_report] = train_classifier(target_data, cls_spec,
                                                 classifier_train_config(cfg));
    save_model(target, join(outdir, "target.model"));
    write_classifier_csv(cls_report, join(outdir, "train-target.csv"));
    std::cerr << "[minv]       accuracy " << classifier_accuracy(target, target_data) << "\n";

    // 2. GAN on the superset
    std::cerr << "[minv] [2/5] training GAN on superset (" << superset.size() << " samples)\n";
    ModelSpec gen_spec = generator_spec_from(cfg, superset.dim(), superset.unit_range);
    ModelSpec disc_spec = discriminator_spec_from(cfg, superset.dim());
    auto [gan, gan_report] = train_gan(superset, gen_spec, disc_spec, gan_train_config(cfg));
    require(!gan_report.aborted, Errc::numeric, "GAN training diverged: " + gan_report.abort_reason);
    save_model(gan.generator, join(outdir, "generator.model"));
    save_model(gan.discriminator, join(outdir, "discriminator.model"));
    write_gan_csv(gan_report, join(outdir, "train-gan.csv"));

    // 3. attacks, both modes, equal budget
    std::cerr << "[minv] [3/5] inverting " << target_data.class_count()
              << " classes in both modes\n";
    AttackConfig base = attack_config_from(cfg);
    std::vector<InversionResult> direct_results, latent_results;
    for (std::size_t c = 0; c < target_data.class_count(); ++c) {
        AttackConfig ac = base;
        ac.target_class = static_cast<int>(c);
        ac.mode = AttackMode::direct;
        InversionResult rd = invert_direct(target, ac);
        rd.nn_distance =
            nearest_sample_distance(target_data, static_cast<std::int32_t>(c), rd.x);
        direct_results.push_back(std::move(rd));

        ac.mode = AttackMode::latent;
        InversionResult rl = invert_latent(target, gan.generator, ac);
        rl.nn_distance =
            nearest_sample_distance(target_data, static_cast<std::int32_t>(c), rl.x);
        latent_results.push_back(std::move(rl));
        std::cerr << "[minv]       class " << c << ": direct conf "
                  << direct_results.back().confidence << " nn "
                  << direct_results.back().nn_distance << " | latent conf "
                  << latent_results.back().confidence << " nn "
                  << latent_results.back().nn_distance << "\n";
    }

    // grids mirroring the with/without-manifold contrast
    auto [h, w] = image_dims_for(target_data.dim(), &target_data);
    if (h != 0) {
        auto grid = [&](const std::vector<InversionResult>& results, const std::string& name) {
            Tensor strip({results.size(), target_data.dim()});
            auto sd = strip.data();
            for (std::size_t k = 0; k < results.size(); ++k)
                std::copy(results[k].x.data().begin(), results[k].x.data().end(),
                          sd.begin() + k * target_data.dim());
            write_pgm_grid(strip, h, w, results.size(), join(outdir, name));
        };
        grid(direct_results, "direct-grid.pgm");
        grid(latent_results, "latent-grid.pgm");
    }

    // 4. manifold analysis
    std::cerr << "[minv] [4/5] manifold analysis\n";
    LipschitzReport lip = estimate_lipschitz(
        gan.generator, static_cast<std::size_t>(cfg.get_int("manifold.pairs")),
        derive_seed(seed, "lipschitz"));

    // 5. interpolation tunnel between the first two recovered latents
    std::cerr << "[minv] [5/5] interpolation trace\n";
    if (latent_results.size() >= 2) {
        InterpolationTrace tr = interpolate(
            gan.generator, target, &gan.discriminator, latent_results[0].z, latent_results[1].z,
            static_cast<std::size_t>(cfg.get_int("manifold.interp_steps")));
        if (h != 0) {
            Tensor strip({tr.steps.size(), target_data.dim()});
            auto sd = strip.data();
            for (std::size_t k = 0; k < tr.steps.size(); ++k)
                std::copy(tr.steps[k].image.data().begin(), tr.steps[k].image.data().end(),
                          sd.begin() + k * target_data.dim());
            write_pgm_grid(strip, h, w, tr.steps.size(), join(outdir, "interp.pgm"));
        }
    }

    // comparison report
    CsvWriter csv(join(outdir, "report.csv"),
                  {"class", "name", "direct_confidence", "direct_nn_distance",
                   "latent_confidence", "latent_nn_distance"});
    std::size_t latent_wins = 0, latent_confident = 0;
    for (std::size_t c = 0; c < target_data.class_count(); ++c) {
        const auto& rd = direct_results[c];
        const auto& rl = latent_results[c];
        if (rl.nn_distance < rd.nn_distance) ++latent_wins;
        if (rl.confidence >= 0.9) ++latent_confident;
        csv.row({CsvWriter::num(c), target_data.class_names[c], CsvWriter::num(rd.confidence),
                 CsvWriter::num(rd.nn_distance), CsvWriter::num(rl.confidence),
                 CsvWriter::num(rl.nn_distance)});
    }
    csv.close();

    std::vector<KvEntry> kv;
    kv.push_back({"experiment", "name", experiment});
    kv.push_back({"experiment", "classes", std::to_string(target_data.class_count())});
    kv.push_back({"experiment", "superset", superset.provenance_id()});
    kv.push_back({"experiment", "target_data", target_data.provenance_id()});
    kv.push_back({"experiment", "gen_loss", gen_loss_name(gan_report.gen_loss)});
    kv.push_back({"experiment", "gan_clamp_events", std::to_string(gan_report.clamp_events)});
    kv.push_back({"attacks", "direct", std::to_string(direct_results.size())});
    kv.push_back({"attacks", "latent", std::to_string(latent_results.size())});
    kv.push_back({"attacks", "latent_confident", std::to_string(latent_confident)});
    kv.push_back({"attacks", "latent_nn_wins", std::to_string(latent_wins)});
    kv.push_back({"attacks", "budget_iters", std::to_string(base.max_iters)});
    kv.push_back({"attacks", "budget_restarts", std::to_string(base.restarts)});
    kv.push_back({"lipschitz", "beta_empirical", CsvWriter::num(lip.beta_empirical)});
    kv.push_back({"lipschitz", "beta_upper", CsvWriter::num(lip.beta_upper)});
    kv.push_back({"lipschitz", "norms", "l2 in both spaces, prior effective support"});
    std::ofstream rep(join(outdir, "report.txt"), std::ios::trunc);
    require(rep.good(), Errc::io, "cannot write report");
    rep << format_kv_text(kv);
    rep.close();
    std::cerr << "[minv] report: " << latent_confident << "/" << target_data.class_count()
              << " latent attacks confident, " << latent_wins << "/"
              << target_data.class_count() << " closer than direct\n";
}

} // namespace minv
