#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace minv {

enum class OptKind { sgd, adam };

struct OptimizerConfig {
    OptKind kind = OptKind::adam;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

OptKind opt_kind_from_string(const std::string& s);
const char* opt_kind_name(OptKind k);

// First-order optimizer state over a fixed list of parameters. Moment buffers
// are allocated on first step and keyed by position, so the parameter list
// must keep a stable order.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

    const OptimizerConfig& config() const { return cfg_; }
    std::int64_t step_count() const { return steps_; }

    // in-place parameter update; refuses non-finite gradients
    void step(std::span<Tensor> params, std::span<const Tensor> grads);

private:
    OptimizerConfig cfg_;
    std::int64_t steps_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace minv
