// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Usage: acceptance <path-to-minv-cli> [workdir]

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "invert.hpp"
#include "manifold.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "support/oracles.hpp"
#include "train.hpp"

using namespace minv;
namespace fs = std::filesystem;
using minv::testing::dense_solve;
using minv::testing::fd_grad;
using minv::testing::fd_hvp;
using minv::testing::random_spd;
using minv::testing::random_tensor;
using minv::testing::rel_err;

namespace {

std::string g_cli;
std::string g_work;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) return "";
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool same_bytes(const std::string& a, const std::string& b) {
    const std::string ba = slurp(a), bb = slurp(b);
    return !ba.empty() && ba == bb;
}

// desk-scale experiment configuration shared by criteria 6, 7, 8 and 10
Config experiment_config() {
    Config cfg;
    cfg.set("attack.iters", "800");
    cfg.set("attack.restarts", "4");
    cfg.set("gan.epochs", "40");
    cfg.set("run.parallel", "2");
    return cfg;
}

bool mnist_present(const Config& cfg) {
    return fs::exists(cfg.get("data.idx_images")) && fs::exists(cfg.get("data.idx_labels"));
}

struct ReportRow {
    double direct_conf, direct_nn, latent_conf, latent_nn;
};

std::vector<ReportRow> parse_report(const std::string& path, std::string& err) {
    std::vector<ReportRow> rows;
    std::ifstream f(path);
    if (!f.good()) {
        err = "missing " + path;
        return rows;
    }
    std::string line;
    std::getline(f, line); // header
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::istringstream in(line);
        std::string tok;
        while (std::getline(in, tok, ',')) cells.push_back(tok);
        if (cells.size() != 6) continue;
        rows.push_back({std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4]),
                        std::stod(cells[5])});
    }
    return rows;
}

// ---- criteria ----

bool criterion_gradients(std::string& detail) {
    const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::tanh};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Rng dims(derive_seed(9000, "dims", trial));
        const std::size_t layer_count = 2 + dims.below(3); // 2..4 weight layers
        std::vector<std::size_t> sizes{2 + dims.below(12)};
        for (std::size_t l = 0; l < layer_count; ++l) sizes.push_back(2 + dims.below(63));
        ModelSpec spec =
            ModelSpec::dense(ModelRole::classifier, sizes, acts[trial % 3]);
        for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l)
            spec.layers[l].act = acts[dims.below(3)];
        Model m = build_model(spec, 9100 + trial);

        Rng rng(derive_seed(9001, "x", trial));
        Tensor x = random_tensor({1, sizes.front()}, rng, 0.05, 0.95);
        const int target = static_cast<int>(rng.below(sizes.back()));
        const double lambda = trial % 2 ? 0.05 : 0.0;
        const int p = trial % 6 + 1;

        Graph g;
        Value xv = g.leaf(x);
        Value loss = attack_loss(g, m, xv,
                                 one_hot_rows({static_cast<std::int32_t>(target)}, sizes.back()),
                                 lambda, p);
        Tensor grad = g.grad_of(loss, xv);
        Tensor fd = fd_grad(
            [&](const Tensor& pt) { return attack_loss_value(m, pt, target, lambda, p); }, x,
            1e-5);
        worst = std::max(worst, rel_err(grad, fd));
    }
    detail = "worst relative error " + std::to_string(worst) + " over 20 networks";
    return worst < 1e-4;
}

bool criterion_hvp(std::string& detail) {
    double worst_fd = 0.0, worst_sym = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        Rng dims(derive_seed(9200, "dims", trial));
        const std::size_t in = 3 + dims.below(8);
        const std::size_t hidden = 6 + dims.below(20);
        const std::size_t out = 2 + dims.below(5);
        ModelSpec spec =
            ModelSpec::dense(ModelRole::classifier, {in, hidden, out}, Activation::sigmoid);
        Model m = build_model(spec, 9300 + trial);
        Tensor onehot = one_hot_rows({static_cast<std::int32_t>(dims.below(out))}, out);
        LossFn f = [&](Graph& g, Value x) {
            GraphModel gm = bind_model(g, m, false);
            return g.softmax_ce(forward_pre_final(g, gm, m.spec, x), onehot);
        };
        Rng rng(derive_seed(9201, "x", trial));
        Tensor x = random_tensor({1, in}, rng, -0.5, 0.5);
        Tensor v = random_tensor({1, in}, rng);
        Tensor u = random_tensor({1, in}, rng);

        Tensor hv = hvp(f, x, v);
        Tensor fd = fd_hvp([&](const Tensor& pt) { return loss_grad(f, pt); }, x, v, 1e-4);
        worst_fd = std::max(worst_fd, rel_err(hv, fd));

        const double uhv = dot(u, hv);
        const double vhu = dot(v, hvp(f, x, u));
        worst_sym = std::max(
            worst_sym, std::abs(uhv - vhu) / std::max({std::abs(uhv), std::abs(vhu), 1e-12}));
    }
    detail = "worst fd error " + std::to_string(worst_fd) + ", worst symmetry gap " +
             std::to_string(worst_sym);
    return worst_fd < 1e-3 && worst_sym < 1e-6;
}

bool criterion_cg(std::string& detail) {
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(derive_seed(9400, "cg", trial));
        const std::size_t n = 50;
        Tensor a = random_spd(n, rng);
        Tensor b = random_tensor({n}, rng);
        auto apply = [&](const Tensor& p) {
            Tensor col({n, 1}, std::vector<double>(p.data().begin(), p.data().end()));
            Tensor out = matmul(a, col);
            return Tensor({n}, std::vector<double>(out.data().begin(), out.data().end()));
        };
        auto res = cg_solve(apply, b, 1e-10, 200, 0.0);
        Tensor r = apply(res.x);
        axpy(-1.0, b, r);
        if (!res.converged || res.iterations > 200 || norm2(r) >= 1e-8) {
            detail = "trial " + std::to_string(trial) + ": residual " + std::to_string(norm2(r));
            return false;
        }
        if (rel_err(res.x, dense_solve(a, b)) >= 1e-6) {
            detail = "trial " + std::to_string(trial) + " deviates from dense solve";
            return false;
        }
    }
    detail = "5 random 50x50 SPD systems matched the dense oracle";
    return true;
}

bool criterion_newton(std::string& detail) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(derive_seed(9500, "newton", trial));
        const std::size_t n = 8;
        Tensor a = random_spd(n, rng);
        Tensor minimizer = random_tensor({1, n}, rng);
        LossFn f = [&](Graph& g, Value x) {
            Value shift = g.sub(x, g.constant(minimizer));
            return g.scale(g.sum(g.mul(shift, g.matmul(shift, g.constant(a)))), 0.5);
        };
        CgSettings cg;
        cg.tol = 1e-12;
        cg.max_iters = 200;
        cg.damping = 0.0;
        NewtonResult res = newton_refine(f, random_tensor({1, n}, rng), cg);
        Tensor diff = res.x;
        axpy(-1.0, minimizer, diff);
        worst = std::max(worst, norm2(diff));
    }
    detail = "worst distance to analytic minimizer " + std::to_string(worst);
    return worst < 1e-6;
}

bool criterion_gan_modes(std::string& detail) {
    Dataset d = synth_modes({{-1.0, 0.0}, {1.0, 0.0}}, 1000, 0.05, 5);
    ModelSpec gspec = ModelSpec::dense(ModelRole::generator, {8, 32, 32, 2}, Activation::relu);
    gspec.layers.back().act = Activation::tanh;
    gspec.output_range = "[-1,1]";
    ModelSpec dspec =
        ModelSpec::dense(ModelRole::discriminator, {2, 32, 32, 1}, Activation::relu);
    TrainConfig tc;
    tc.epochs = 60;
    tc.batch = 64;
    tc.seed = 42;
    tc.opt = {OptKind::adam, 1e-3, 0.5, 0.999, 1e-8};
    tc.disc_opt = tc.opt;
    auto [models, rep] = train_gan(d, gspec, dspec, tc);
    if (rep.aborted) {
        detail = "training aborted: " + rep.abort_reason;
        return false;
    }
    Rng rng(7);
    Tensor x = infer(models.generator, sample_latent(models.generator.spec, 1000, rng));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const double dl = std::hypot(x.at(i, 0) + 1.0, x.at(i, 1));
        const double dr = std::hypot(x.at(i, 0) - 1.0, x.at(i, 1));
        if (std::min(dl, dr) <= 0.3) ++hits;
    }
    detail = std::to_string(hits) + "/1000 samples within radius 0.3 of a mode";
    return hits >= 950;
}

bool criterion_core_contrast(std::string& detail) {
    Config cfg = experiment_config();
    const std::string out = g_work + "/contrast";
    const char* experiment = mnist_present(cfg) ? "mnist-6of10" : "synthetic";
    run_reproduce(cfg, experiment, out);

    std::string err;
    auto rows = parse_report(out + "/report.csv", err);
    if (rows.size() != 6) {
        detail = err.empty() ? "expected 6 classes, got " + std::to_string(rows.size()) : err;
        return false;
    }
    int ok = 0;
    for (const auto& r : rows)
        if (r.latent_conf >= 0.9 && r.latent_nn < r.direct_nn) ++ok;
    detail = std::string(experiment) + ": " + std::to_string(ok) +
             "/6 classes with latent conf >= 0.9 and smaller sample distance";
    return ok >= 5;
}

bool criterion_sweep(std::string& detail) {
    Config cfg = experiment_config();
    const std::string contrast = g_work + "/contrast";
    cfg.set("models.target", contrast + "/target.model");
    cfg.set("models.generator", contrast + "/generator.model");
    cfg.set("data.keep", "0,1,2,3,4,5"); // nn-distance dataset = target's training set
    const std::string out = g_work + "/sweep";
    run_sweep_p(cfg, out);

    std::ifstream f(out + "/sweep-p.csv");
    if (!f.good()) {
        detail = "sweep-p.csv missing";
        return false;
    }
    std::string line;
    std::getline(f, line);
    int cells = 0, confident = 0;
    double min_conf = 1.0;
    while (std::getline(f, line)) {
        std::vector<std::string> c;
        std::istringstream in(line);
        std::string tok;
        while (std::getline(in, tok, ',')) c.push_back(tok);
        if (c.size() < 4 || c[1] != "ok") continue;
        ++cells;
        const double conf = std::stod(c[3]);
        min_conf = std::min(min_conf, conf);
        if (conf >= 0.9) ++confident;
    }
    detail = std::to_string(confident) + "/" + std::to_string(cells) +
             " cells confident, min confidence " + std::to_string(min_conf);
    return cells == 7 && confident == 7;
}

bool criterion_lipschitz(std::string& detail) {
    const std::string contrast = g_work + "/contrast";
    Model gen = load_model(contrast + "/generator.model");
    LipschitzReport lip = estimate_lipschitz(gen, 10000, derive_seed(42, "acceptance-lip"));
    if (lip.beta_empirical > lip.beta_upper + 1e-9) {
        detail = "beta_empirical " + std::to_string(lip.beta_empirical) + " exceeds bound " +
                 std::to_string(lip.beta_upper);
        return false;
    }
    Config cfg = experiment_config();
    Dataset corpus = resolve_dataset(cfg, false);
    auto take = [&](std::int32_t label) {
        auto idx = corpus.class_indices(label);
        if (idx.size() > 500) idx.resize(500);
        Tensor out({idx.size(), corpus.dim()});
        auto src = corpus.images.data();
        auto dst = out.data();
        for (std::size_t k = 0; k < idx.size(); ++k)
            std::copy(src.begin() + idx[k] * corpus.dim(),
                      src.begin() + (idx[k] + 1) * corpus.dim(), dst.begin() + k * corpus.dim());
        return out;
    };
    const double gamma = manifold_gap(take(0), take(1));
    const std::size_t violations = count_gap_bound_violations(
        gen, gamma, lip.beta_upper, 10000, derive_seed(42, "acceptance-gap"));
    detail = "beta_emp " + std::to_string(lip.beta_empirical) + " <= beta_upper " +
             std::to_string(lip.beta_upper) + ", gamma " + std::to_string(gamma) + ", " +
             std::to_string(violations) + " bound violations over 10000 pairs";
    return violations == 0;
}

bool criterion_determinism(std::string& detail) {
    // in-process: save/load round-trip is bit-exact
    ModelSpec spec = ModelSpec::dense(ModelRole::generator, {12, 40, 49}, Activation::relu);
    Model m = build_model(spec, 4242);
    const std::string p1 = g_work + "/det-a.model", p2 = g_work + "/det-b.model";
    save_model(m, p1);
    Model r = load_model(p1);
    for (std::size_t l = 0; l < m.weights.size(); ++l)
        for (std::size_t i = 0; i < m.weights[l].size(); ++i)
            if (r.weights[l][i] != m.weights[l][i]) {
                detail = "round-trip changed a weight";
                return false;
            }
    save_model(r, p2);
    if (!same_bytes(p1, p2)) {
        detail = "re-saved model differs byte-wise";
        return false;
    }

    // through the CLI: identical config+seed => byte-identical artifacts
    const std::string cfg_path = g_work + "/det.cfg";
    {
        std::ofstream f(cfg_path);
        f << "[data]\nglyph_classes = 6\nglyph_per_class = 24\nglyph_size = 8\nkeep = 0,1,2\n"
          << "[classifier]\nhidden = 24\nepochs = 2\nbatch = 24\n"
          << "[attack]\nmode = direct\nclass = 1\niters = 50\nrestarts = 2\n";
    }
    // identical config + seed: the target model path must be shared, only
    // the output directory differs
    const std::string a = g_work + "/det-run-a", b = g_work + "/det-run-b";
    const std::string shared_target = g_work + "/det-target.model";
    for (const std::string& dir : {a, b}) {
        const std::string cmd = g_cli + " train-target --config " + cfg_path + " -o " + dir +
                                " 2>/dev/null";
        if (std::system(cmd.c_str()) != 0) {
            detail = "cli train-target failed";
            return false;
        }
    }
    fs::copy_file(a + "/target.model", shared_target, fs::copy_options::overwrite_existing);
    for (const std::string& dir : {a, b}) {
        const std::string inv = g_cli + " invert --config " + cfg_path + " -o " + dir +
                                " --set models.target=" + shared_target + " 2>/dev/null";
        if (std::system(inv.c_str()) != 0) {
            detail = "cli invert failed";
            return false;
        }
    }
    for (const char* name :
         {"target.model", "train-target.csv", "config-echo.txt", "invert-direct-class1.pgm",
          "invert-direct-class1-trace.csv"}) {
        if (!same_bytes(a + "/" + name, b + "/" + name)) {
            detail = std::string("artifact differs between identical runs: ") + name;
            return false;
        }
    }
    detail = "model round-trip bit-exact; CLI train-target + invert artifacts byte-identical";
    return true;
}

bool criterion_five_of_ten(std::string& detail) {
    Config cfg = experiment_config();
    const std::string out = g_work + "/fashion";
    if (fs::exists("data/fashion-images-idx3-ubyte") &&
        fs::exists("data/fashion-labels-idx1-ubyte")) {
        cfg.set("data.idx_images", "data/fashion-images-idx3-ubyte");
        cfg.set("data.idx_labels", "data/fashion-labels-idx1-ubyte");
        run_reproduce(cfg, "fashion-5of10", out);
    } else {
        // synthetic surrogate with the 5-of-10 split
        cfg.set("reproduce.keep", "0,1,2,3,4");
        run_reproduce(cfg, "synthetic", out);
    }
    std::string err;
    auto rows = parse_report(out + "/report.csv", err);
    if (rows.size() != 5) {
        detail = err.empty() ? "expected 5 classes, got " + std::to_string(rows.size()) : err;
        return false;
    }
    int confident = 0;
    for (const auto& r : rows)
        if (r.latent_conf >= 0.9) ++confident;
    detail = std::to_string(confident) + "/5 latent attacks with confidence >= 0.9";
    return confident == 5;
}

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<bool(std::string&)> run;
};

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-minv-cli> [workdir]\n");
        return 2;
    }
    g_cli = argv[1];
    g_work = argc > 2 ? argv[2] : "/tmp/minv-acceptance-" + std::to_string(::getpid());
    fs::create_directories(g_work);

    const std::vector<Criterion> criteria = {
        {1, "gradient correctness vs central finite differences", 60, criterion_gradients},
        {2, "hvp matches fd-of-gradients and is symmetric", 60, criterion_hvp},
        {3, "cg solves SPD systems and matches a dense oracle", 10, criterion_cg},
        {4, "newton refinement exact on SPD quadratics", 10, criterion_newton},
        {5, "two-mode gan concentrates samples at true modes", 120, criterion_gan_modes},
        {6, "latent attacks beat direct attacks on the 6-of-10 setup", 600,
         criterion_core_contrast},
        {7, "p-sweep: every regularizer order stays confident", 600, criterion_sweep},
        {8, "lipschitz bound and latent-gap bound hold over 10000 pairs", 120,
         criterion_lipschitz},
        {9, "serialization round-trip and byte-identical reruns", 60, criterion_determinism},
        {10, "5-of-10 reproduction: all five latent attacks confident", 600,
         criterion_five_of_ten},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            ok = false;
            detail += " [exceeded " + std::to_string(c.budget_seconds) + "s budget]";
        }
        std::printf("%s criterion %2d: %s — %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.title,
                    detail.c_str(), secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
