#include "invert.hpp"

#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

#include "rng.hpp"

namespace minv {

AttackMode attack_mode_from_string(const std::string& s) {
    if (s == "direct") return AttackMode::direct;
    if (s == "latent") return AttackMode::latent;
    raise(Errc::config, "unknown attack mode '" + s + "' (expected direct or latent)");
}

const char* attack_mode_name(AttackMode m) {
    return m == AttackMode::direct ? "direct" : "latent";
}

void AttackConfig::validate() const {
    require(p >= 0 && p <= 6, Errc::config,
            "regularizer order p must be in [1,6] (or none), got " + std::to_string(p));
    require(lambda >= 0.0, Errc::config, "lambda must be >= 0");
    require(restarts >= 1, Errc::config, "restarts must be >= 1");
    require(max_iters >= 0, Errc::config, "max_iters must be >= 0");
    require(patience >= 1, Errc::config, "patience must be >= 1");
    require(target_class >= 0, Errc::config, "target class must be >= 0");
    require(parallel >= 1, Errc::config, "parallel must be >= 1");
}

Value lp_term(Graph& g, Value v, int p) {
    return g.lp_sum(v, p);
}

Value attack_loss(Graph& g, const Model& classifier, Value x, const Tensor& one_hot,
                  double lambda, int p) {
    require(classifier.spec.role == ModelRole::classifier, Errc::invalid_argument,
            "attack_loss: model is not a classifier");
    GraphModel cm = bind_model(g, classifier, false);
    Value logits = forward_pre_final(g, cm, classifier.spec, x);
    Value ce = g.softmax_ce(logits, one_hot);
    if (lambda == 0.0 || p == 0) return ce;
    return g.add(ce, g.scale(lp_term(g, x, p), lambda));
}

double attack_loss_value(const Model& classifier, const Tensor& x, int target_class,
                         double lambda, int p) {
    Graph g;
    Tensor xb = x.rank() == 1
                    ? Tensor({1, x.size()}, std::vector<double>(x.data().begin(), x.data().end()))
                    : x;
    Value xv = g.constant(xb);
    Tensor y = one_hot_rows({static_cast<std::int32_t>(target_class)},
                            classifier.spec.output_size());
    return g.value(attack_loss(g, classifier, xv, y, lambda, p)).item();
}

namespace {

Tensor flatten(const Tensor& t) {
    return Tensor({t.size()}, std::vector<double>(t.data().begin(), t.data().end()));
}

Tensor as_row(const Tensor& t) {
    return Tensor({1, t.size()}, std::vector<double>(t.data().begin(), t.data().end()));
}

void clamp_unit(Tensor& t) {
    for (double& v : t.data()) v = std::min(1.0, std::max(0.0, v));
}

struct RestartOutcome {
    bool ok = false;
    Tensor point; // [1, dim]
    double loss = std::numeric_limits<double>::infinity();
    double confidence = 0.0;
    std::vector<IterRecord> trace;
};

struct Problem {
    const Model* classifier = nullptr;
    const Model* generator = nullptr; // null in direct mode
    const AttackConfig* cfg = nullptr;
    Tensor one_hot; // [1, k]
    std::size_t dim = 0;

    // builds the loss for the current point; fills logits out-param
    Value build(Graph& g, Value point, Value* logits_out) const {
        Value image = point;
        if (generator) {
            GraphModel gm = bind_model(g, *generator, false);
            image = apply_final_activation(
                g, generator->spec, forward_pre_final(g, gm, generator->spec, point));
        }
        GraphModel cm = bind_model(g, *classifier, false);
        Value logits = forward_pre_final(g, cm, classifier->spec, image);
        if (logits_out) *logits_out = logits;
        Value loss = g.softmax_ce(logits, one_hot);
        if (cfg->lambda != 0.0 && cfg->p != 0) {
            Value reg_target = (generator && cfg->regularize_image) ? image : point;
            loss = g.add(loss, g.scale(g.lp_sum(reg_target, cfg->p), cfg->lambda));
        }
        return loss;
    }

    double confidence_from_logits(const Tensor& logits) const {
        Tensor probs = softmax_rows(logits);
        return probs.at(0, static_cast<std::size_t>(cfg->target_class));
    }

    Tensor initial_point(int restart) const {
        if (!cfg->init.empty()) {
            require(cfg->init.size() == dim, Errc::shape_mismatch,
                    "explicit init has size " + std::to_string(cfg->init.size()) +
                        ", expected " + std::to_string(dim));
            return as_row(cfg->init);
        }
        Rng rng(derive_seed(cfg->seed, "restart-init", static_cast<std::uint64_t>(restart)));
        if (generator) {
            return sample_latent(generator->spec, 1, rng);
        }
        Tensor x({1, dim});
        for (double& v : x.data()) v = rng.uniform();
        return x;
    }
};

RestartOutcome run_restart(const Problem& prob, int restart) {
    const AttackConfig& cfg = *prob.cfg;
    RestartOutcome out;
    try {
        Tensor point = prob.initial_point(restart);
        Optimizer opt(cfg.opt);
        std::vector<double> best_history;
        best_history.reserve(cfg.max_iters);

        double best_loss = std::numeric_limits<double>::infinity();

        auto evaluate_only = [&](const Tensor& pt, double& loss, double& conf) {
            Graph g;
            Value pv = g.constant(pt);
            Value logits;
            Value lv = prob.build(g, pv, &logits);
            loss = g.value(lv).item();
            conf = prob.confidence_from_logits(g.value(logits));
        };

        if (cfg.max_iters == 0) {
            double loss, conf;
            evaluate_only(point, loss, conf);
            out.point = point;
            out.loss = loss;
            out.confidence = conf;
            out.ok = true;
            return out;
        }

        for (int iter = 0; iter < cfg.max_iters; ++iter) {
            Graph g;
            Value pv = g.leaf(point);
            Value logits;
            Value lv = prob.build(g, pv, &logits);
            const double loss = g.value(lv).item();
            const double conf = prob.confidence_from_logits(g.value(logits));
            out.trace.push_back({iter, loss, conf});

            if (loss < best_loss) {
                best_loss = loss;
                out.point = point;
                out.loss = loss;
                out.confidence = conf;
            }
            best_history.push_back(best_loss);

            // stop when the best loss moved by less than tol over the window
            if (iter >= cfg.patience &&
                best_history[iter - cfg.patience] - best_loss < cfg.tol)
                break;

            Tensor grad = g.grad_of(lv, pv);
            Tensor params[] = {std::move(point)};
            Tensor grads[] = {std::move(grad)};
            opt.step(params, grads);
            point = std::move(params[0]);
            if (!prob.generator) clamp_unit(point);
        }
        out.ok = true;
    } catch (const Error& e) {
        if (e.code() != Errc::numeric) throw;
        out.ok = false;
        out.loss = std::numeric_limits<double>::infinity();
        std::cerr << "[minv] restart " << restart << " aborted: " << e.what() << "\n";
    }
    return out;
}

InversionResult run_attack(const Model& classifier, const Model* generator,
                           const AttackConfig& cfg) {
    cfg.validate();
    require(classifier.spec.role == ModelRole::classifier, Errc::invalid_argument,
            "attack target must be a classifier");
    require(static_cast<std::size_t>(cfg.target_class) < classifier.spec.output_size(),
            Errc::invalid_argument,
            "target class " + std::to_string(cfg.target_class) + " out of range for " +
                std::to_string(classifier.spec.output_size()) + " classes");
    if (generator) {
        require(generator->spec.role == ModelRole::generator, Errc::invalid_argument,
                "latent attack needs a generator model");
        require(generator->spec.output_size() == classifier.spec.input_size(),
                Errc::shape_mismatch,
                "generator output size " + std::to_string(generator->spec.output_size()) +
                    " does not match classifier input " +
                    std::to_string(classifier.spec.input_size()));
    }

    Problem prob;
    prob.classifier = &classifier;
    prob.generator = generator;
    prob.cfg = &cfg;
    prob.one_hot = one_hot_rows({static_cast<std::int32_t>(cfg.target_class)},
                                classifier.spec.output_size());
    prob.dim = generator ? generator->spec.latent_dim : classifier.spec.input_size();

    std::vector<RestartOutcome> outcomes(cfg.restarts);
    if (cfg.parallel <= 1 || cfg.restarts == 1) {
        for (int r = 0; r < cfg.restarts; ++r) outcomes[r] = run_restart(prob, r);
    } else {
        // fixed-stride assignment keeps results independent of scheduling
        std::vector<std::thread> pool;
        const int workers = std::min(cfg.parallel, cfg.restarts);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int r = w; r < cfg.restarts; r += workers)
                    outcomes[r] = run_restart(prob, r);
            });
        }
        for (auto& t : pool) t.join();
    }

    InversionResult res;
    res.config = cfg;
    int winner = -1;
    for (int r = 0; r < cfg.restarts; ++r) {
        if (!outcomes[r].ok) {
            ++res.restarts_failed;
            continue;
        }
        if (winner < 0 || outcomes[r].loss < outcomes[winner].loss) winner = r;
    }
    require(winner >= 0, Errc::numeric, "all restarts failed with non-finite losses");

    RestartOutcome& win = outcomes[winner];
    res.winning_restart = winner;
    res.loss = win.loss;
    res.confidence = win.confidence;
    res.trace = std::move(win.trace);

    if (generator) {
        res.z = flatten(win.point);
        res.x = infer(*generator, res.z); // x-hat is exactly G(z-hat)
    } else {
        res.x = flatten(win.point);
    }

    if (cfg.second_order) {
        res.newton.attempted = true;
        LossFn f = [&](Graph& g, Value pv) { return prob.build(g, pv, nullptr); };
        NewtonResult nr = newton_refine(f, win.point, cfg.cg);
        Tensor candidate = nr.x;
        if (!generator) clamp_unit(candidate);
        double cand_loss, cand_conf;
        {
            Graph g;
            Value pv = g.constant(candidate);
            Value logits;
            Value lv = prob.build(g, pv, &logits);
            cand_loss = g.value(lv).item();
            cand_conf = prob.confidence_from_logits(g.value(logits));
        }
        nr.diag.loss_after = cand_loss;
        res.newton.diag = nr.diag;
        if (cand_loss < res.loss) {
            res.newton.accepted = true;
            res.loss = cand_loss;
            res.confidence = cand_conf;
            if (generator) {
                res.z = flatten(candidate);
                res.x = infer(*generator, res.z);
            } else {
                res.x = flatten(candidate);
            }
        }
    }
    return res;
}

} // namespace

InversionResult invert_direct(const Model& classifier, const AttackConfig& cfg) {
    require(cfg.mode == AttackMode::direct, Errc::invalid_argument,
            "invert_direct: config mode is not 'direct'");
    return run_attack(classifier, nullptr, cfg);
}

InversionResult invert_latent(const Model& classifier, const Model& generator,
                              const AttackConfig& cfg) {
    require(cfg.mode == AttackMode::latent, Errc::invalid_argument,
            "invert_latent: config mode is not 'latent'");
    return run_attack(classifier, &generator, cfg);
}

std::vector<SweepCell> sweep_p(const Model& classifier, const Model* generator,
                               const AttackConfig& base, std::vector<int> p_values) {
    base.validate();
    if (p_values.empty()) p_values = {0, 1, 2, 3, 4, 5, 6};
    for (int p : p_values)
        require(p >= 0 && p <= 6, Errc::config,
                "sweep_p: p=" + std::to_string(p) + " outside [1,6] (or 0 for none)");
    if (base.mode == AttackMode::latent)
        require(generator != nullptr, Errc::invalid_argument,
                "sweep_p: latent mode requires a generator");

    std::vector<SweepCell> cells;
    for (int p : p_values) {
        SweepCell cell;
        cell.p = p;
        AttackConfig cfg = base;
        cfg.p = p;
        try {
            cell.result = cfg.mode == AttackMode::latent
                              ? invert_latent(classifier, *generator, cfg)
                              : invert_direct(classifier, cfg);
            cell.ok = true;
        } catch (const Error& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

} // namespace minv
