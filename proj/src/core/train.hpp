#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "optim.hpp"

namespace minv {

enum class GenLossMode { non_saturating, minimax };

GenLossMode gen_loss_from_string(const std::string& s);
const char* gen_loss_name(GenLossMode m);

struct TrainConfig {
    int epochs = 10;
    std::size_t batch = 64;
    std::uint64_t seed = 0;
    OptimizerConfig opt;      // classifier, or generator when training a GAN
    OptimizerConfig disc_opt; // discriminator
    int disc_steps = 1;       // discriminator updates per generator update
    GenLossMode gen_loss = GenLossMode::non_saturating;

    void validate(std::size_t dataset_size) const;
};

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct GanEpochStats {
    double d_loss = 0.0;
    double g_loss = 0.0;
    double d_real_mean = 0.0;
    double d_fake_mean = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> classifier_curve;
    std::vector<GanEpochStats> gan_curve;
    double wall_seconds = 0.0; // reported to stderr only, never into artifacts
    bool loss_smooth_ok = true;
    long clamp_events = 0; // log-argument clamp engaged during GAN updates
    bool aborted = false;
    std::string abort_reason;
    GenLossMode gen_loss = GenLossMode::non_saturating;
};

// log-argument clamp for the min-max objective
inline constexpr double kGanLogEps = 1e-7;

struct GanObjective {
    double d_loss = 0.0;
    double g_loss = 0.0;
    bool clamped = false;
};

// d_loss = -mean(log d_real) - mean(log(1 - d_fake));
// g_loss = mean(log(1 - d_fake)) in minimax mode, -mean(log d_fake) otherwise.
GanObjective gan_objective(const Tensor& d_real, const Tensor& d_fake, GenLossMode mode);

std::pair<Model, TrainReport> train_classifier(const Dataset& data, const ModelSpec& spec,
                                               const TrainConfig& cfg);

struct GanModels {
    Model generator;
    Model discriminator;
};

std::pair<GanModels, TrainReport> train_gan(const Dataset& data, const ModelSpec& gen_spec,
                                            const ModelSpec& disc_spec, const TrainConfig& cfg);

// exact accuracy over a full dataset
double classifier_accuracy(const Model& m, const Dataset& data);

// 5-epoch moving average of the loss curve never rises by more than 10%
bool smoothed_loss_non_increasing(const std::vector<double>& losses);

Tensor one_hot_rows(const std::vector<std::int32_t>& labels, std::size_t classes);

} // namespace minv
