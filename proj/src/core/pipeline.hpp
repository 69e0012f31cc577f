#pragma once

#include <string>

#include "config.hpp"
#include "dataset.hpp"
#include "invert.hpp"
#include "manifold.hpp"
#include "model.hpp"
#include "train.hpp"

namespace minv {

// Subcommand implementations. Each writes its artifacts plus a config-echo
// file under `outdir` and reports progress on stderr; errors propagate as
// minv::Error. Identical config + seed produce byte-identical artifacts.

void run_train_target(const Config& cfg, const std::string& outdir);
void run_train_gan(const Config& cfg, const std::string& outdir);
void run_invert(const Config& cfg, const std::string& outdir);
void run_sweep_p(const Config& cfg, const std::string& outdir);
void run_analyze_manifold(const Config& cfg, const std::string& outdir);
void run_interpolate(const Config& cfg, const std::string& outdir);
void run_render(const Config& cfg, const std::string& outdir);
void run_reproduce(const Config& cfg, const std::string& experiment, const std::string& outdir);

// shared helpers (also used by tests)
Dataset resolve_dataset(const Config& cfg, bool apply_keep);
ModelSpec classifier_spec_from(const Config& cfg, std::size_t dim, std::size_t classes);
ModelSpec generator_spec_from(const Config& cfg, std::size_t dim, bool unit_range_images);
ModelSpec discriminator_spec_from(const Config& cfg, std::size_t dim);
TrainConfig classifier_train_config(const Config& cfg);
TrainConfig gan_train_config(const Config& cfg);
AttackConfig attack_config_from(const Config& cfg);

} // namespace minv
