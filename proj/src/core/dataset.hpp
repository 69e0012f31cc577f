#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace minv {

// Labeled sample collection. Image datasets keep pixels in [0,1]; the 2-D
// mode datasets used for GAN sanity checks carry raw coordinates and set
// unit_range = false.
struct Dataset {
    Tensor images; // [n, rows*cols]; empty tensor when n == 0
    std::vector<std::int32_t> labels;
    std::vector<std::string> class_names;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool unit_range = true;

    struct Provenance {
        std::vector<std::string> sources;
        std::vector<std::string> transforms;
    } prov;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return rows * cols; }
    std::size_t class_count() const { return class_names.size(); }

    void validate() const;
    Tensor image(std::size_t i) const;
    std::vector<std::size_t> class_indices(std::int32_t label) const;
    std::vector<std::size_t> class_histogram() const;
    std::string provenance_id() const;
};

// IDX containers (big-endian, magic 0x803 for images / 0x801 for labels).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

Dataset subset_classes(const Dataset& d, const std::vector<std::int32_t>& keep, bool relabel);
Dataset merge(const Dataset& d1, const Dataset& d2);

// Procedural glyph corpus: deterministic shapes with seeded jitter.
std::size_t glyph_shape_count();
Dataset synth_glyphs(std::size_t class_count, std::size_t per_class, std::size_t size,
                     std::uint64_t seed);

// 2-D Gaussian blobs around the given centers.
Dataset synth_modes(const std::vector<std::array<double, 2>>& centers, std::size_t per_mode,
                    double sigma, std::uint64_t seed);

// min Euclidean distance from x to any sample of the given class
double nearest_sample_distance(const Dataset& d, std::int32_t label, const Tensor& x);

} // namespace minv
