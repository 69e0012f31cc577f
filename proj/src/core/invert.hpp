#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "solver.hpp"

namespace minv {

enum class AttackMode { direct, latent };

AttackMode attack_mode_from_string(const std::string& s);
const char* attack_mode_name(AttackMode m);

struct AttackConfig {
    AttackMode mode = AttackMode::latent;
    int target_class = 0;
    double lambda = 0.01;
    int p = 0;                     // 0 = no regularizer, else 1..6
    bool regularize_image = false; // latent mode: apply R to G(z) instead of z
    OptimizerConfig opt{OptKind::adam, 0.05, 0.9, 0.999, 1e-8};
    int max_iters = 2000;
    double tol = 1e-6;  // minimum best-loss improvement
    int patience = 50;  // iterations without improvement before stopping
    int restarts = 8;
    std::uint64_t seed = 0;
    bool second_order = false;
    CgSettings cg;
    Tensor init;      // optional explicit start point ([dim]); empty = sampled
    int parallel = 1; // restarts run concurrently when > 1

    void validate() const;
};

struct IterRecord {
    int iter = 0;
    double loss = 0.0;
    double confidence = 0.0;
};

struct NewtonSummary {
    bool attempted = false;
    bool accepted = false;
    NewtonDiagnostics diag;
};

struct InversionResult {
    Tensor x;          // recovered image, [dim]
    Tensor z;          // latent mode only
    double loss = 0.0;
    double confidence = 0.0;
    std::vector<IterRecord> trace; // winning restart
    int winning_restart = -1;
    int restarts_failed = 0;
    AttackConfig config;
    NewtonSummary newton;
    double nn_distance = -1.0; // optional diagnostic, < 0 when not computed
};

// cross-entropy(f(x), y) + lambda * ||x||_p^p as a graph node over an
// already-placed input; the model parameters enter as constants
Value attack_loss(Graph& g, const Model& classifier, Value x, const Tensor& one_hot,
                  double lambda, int p);

// scalar convenience used by oracles and reports
double attack_loss_value(const Model& classifier, const Tensor& x, int target_class,
                         double lambda, int p);

// sum |v_i|^p; free-standing so the regularizer is testable on its own
Value lp_term(Graph& g, Value v, int p);

InversionResult invert_direct(const Model& classifier, const AttackConfig& cfg);
InversionResult invert_latent(const Model& classifier, const Model& generator,
                              const AttackConfig& cfg);

struct SweepCell {
    int p = 0; // 0 = none
    bool ok = false;
    std::string error;
    InversionResult result;
};

// one attack per p with identical seeds; per-cell failures recorded, sweep
// continues. p_values defaults to {none, 1..6} when empty.
std::vector<SweepCell> sweep_p(const Model& classifier, const Model* generator,
                               const AttackConfig& base, std::vector<int> p_values = {});

} // namespace minv
