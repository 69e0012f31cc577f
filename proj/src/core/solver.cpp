#include "solver.hpp"

#include <cmath>

namespace minv {

double loss_value(const LossFn& f, const Tensor& x) {
    Graph g;
    Value xv = g.leaf(x);
    Value loss = f(g, xv);
    return g.value(loss).item();
}

Tensor loss_grad(const LossFn& f, const Tensor& x) {
    Graph g;
    Value xv = g.leaf(x);
    Value loss = f(g, xv);
    return g.grad_of(loss, xv);
}

Tensor hvp(const LossFn& f, const Tensor& x, const Tensor& v) {
    require(x.same_shape(v), Errc::shape_mismatch,
            "hvp: direction shape " + v.shape_str() + " does not match point " + x.shape_str());
    Graph g;
    Value xv = g.leaf(x, v);
    Value loss = f(g, xv);
    Value leaves[] = {xv};
    auto dual = g.grad_dual(loss, leaves);
    return std::move(dual.grad_dot[0]);
}

CgResult cg_solve(const std::function<Tensor(const Tensor&)>& apply_a, const Tensor& b,
                  double tol, int max_iters, double damping) {
    require(damping >= 0.0, Errc::invalid_argument, "cg_solve: damping must be >= 0");
    require(max_iters >= 0, Errc::invalid_argument, "cg_solve: max_iters must be >= 0");

    auto apply = [&](const Tensor& p) {
        Tensor ap = apply_a(p);
        require(ap.same_shape(p), Errc::shape_mismatch, "cg_solve: operator changed shape");
        if (damping != 0.0) axpy(damping, p, ap);
        return ap;
    };

    CgResult out;
    out.x = Tensor(b.shape());
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }

    Tensor r = b; // r = b - A*0
    Tensor p = r;
    double rs = dot(r, r);

    for (int k = 0; k < max_iters; ++k) {
        if (std::sqrt(rs) <= tol * bnorm) {
            out.converged = true;
            break;
        }
        Tensor ap = apply(p);
        const double pap = dot(p, ap);
        if (pap <= 0.0) {
            if (damping == 0.0) {
                out.indefinite = true;
                break;
            }
            // damping > 0 keeps the operator positive in exact arithmetic;
            // a non-positive curvature here is roundoff, stop with best iterate
            break;
        }
        const double alpha = rs / pap;
        axpy(alpha, p, out.x);
        axpy(-alpha, ap, r);
        const double rs_new = dot(r, r);
        require(std::isfinite(rs_new), Errc::numeric, "cg_solve: non-finite residual");
        const double beta = rs_new / rs;
        rs = rs_new;
        Tensor pn = r;
        axpy(beta, p, pn);
        p = std::move(pn);
        out.iterations = k + 1;
    }
    if (!out.converged && std::sqrt(rs) <= tol * bnorm) out.converged = true;
    out.residual = std::sqrt(rs) / bnorm;
    return out;
}

NewtonResult newton_refine(const LossFn& f, const Tensor& x, const CgSettings& cg) {
    NewtonResult out;
    out.diag.loss_before = loss_value(f, x);

    Tensor g = loss_grad(f, x);
    out.diag.grad_norm = norm2(g);

    Tensor rhs = scale(g, -1.0);
    out.diag.cg = cg_solve([&](const Tensor& v) { return hvp(f, x, v); }, rhs, cg.tol,
                           cg.max_iters, cg.damping);

    out.x = x;
    axpy(1.0, out.diag.cg.x, out.x);
    out.diag.step_norm = norm2(out.diag.cg.x);
    out.diag.loss_after = loss_value(f, out.x);
    return out;
}

} // namespace minv
