#include "optim.hpp"

#include <cmath>

namespace minv {

OptKind opt_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptKind::sgd;
    if (s == "adam") return OptKind::adam;
    raise(Errc::config, "unknown optimizer '" + s + "' (expected sgd or adam)");
}

const char* opt_kind_name(OptKind k) {
    return k == OptKind::sgd ? "sgd" : "adam";
}

void Optimizer::step(std::span<Tensor> params, std::span<const Tensor> grads) {
    require(params.size() == grads.size(), Errc::invalid_argument,
            "optimizer step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(params[i].same_shape(grads[i]), Errc::shape_mismatch,
                "optimizer step: gradient shape mismatch at parameter " + std::to_string(i));
        require(grads[i].all_finite(), Errc::numeric,
                "optimizer step refused: non-finite gradient at parameter " + std::to_string(i));
    }

    if (cfg_.kind == OptKind::adam && m_.empty()) {
        for (const Tensor& p : params) {
            m_.emplace_back(p.shape());
            v_.emplace_back(p.shape());
        }
    }
    ++steps_;

    if (cfg_.kind == OptKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i)
            axpy(-cfg_.lr, grads[i], params[i]);
        return;
    }

    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto pd = params[i].data();
        auto gd = grads[i].data();
        auto md = m_[i].data();
        auto vd = v_[i].data();
        for (std::size_t j = 0; j < pd.size(); ++j) {
            md[j] = cfg_.beta1 * md[j] + (1.0 - cfg_.beta1) * gd[j];
            vd[j] = cfg_.beta2 * vd[j] + (1.0 - cfg_.beta2) * gd[j] * gd[j];
            const double mhat = md[j] / bc1;
            const double vhat = vd[j] / bc2;
            pd[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

} // namespace minv
