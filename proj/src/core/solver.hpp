#pragma once

#include <functional>

#include "graph.hpp"

namespace minv {

// Builds a scalar loss over one tensor input on a fresh graph.
using LossFn = std::function<Value(Graph&, Value)>;

double loss_value(const LossFn& f, const Tensor& x);
Tensor loss_grad(const LossFn& f, const Tensor& x);

// H_x . v without materializing H (directional derivative of the gradient).
Tensor hvp(const LossFn& f, const Tensor& x, const Tensor& v);

struct CgSettings {
    double tol = 1e-4;
    int max_iters = 100;
    double damping = 1e-3;
};

struct CgResult {
    Tensor x;
    bool converged = false;
    bool indefinite = false; // p'Ap <= 0 encountered with zero damping
    int iterations = 0;
    double residual = 0.0; // final ||Ax-b|| / ||b||
};

// Solves (A + damping*I) x = b for a symmetric linear operator given as a
// matrix-free apply callback.
CgResult cg_solve(const std::function<Tensor(const Tensor&)>& apply_a, const Tensor& b,
                  double tol, int max_iters, double damping);

struct NewtonDiagnostics {
    double loss_before = 0.0;
    double loss_after = 0.0;
    double grad_norm = 0.0;
    double step_norm = 0.0;
    CgResult cg;
};

struct NewtonResult {
    Tensor x;
    NewtonDiagnostics diag;
};

// One damped Newton step: solve (H + damping*I) dx = -grad via CG on
// Hessian-vector products, then return x + dx. Acceptance is the caller's
// call; diagnostics carry loss before/after.
NewtonResult newton_refine(const LossFn& f, const Tensor& x, const CgSettings& cg);

} // namespace minv
