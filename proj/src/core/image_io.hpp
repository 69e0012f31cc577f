#pragma once

#include <string>

#include "tensor.hpp"

namespace minv {

// Binary PGM (P5, maxval 255) grid writer. `images` is [n, h*w] (or a single
// [h*w] vector); images flow left-to-right, top-to-bottom with 1-pixel white
// separators between cells and no outer border. Pixels must lie in [0,1] and
// are rounded half-up to [0,255].
void write_pgm_grid(const Tensor& images, std::size_t h, std::size_t w, std::size_t grid_cols,
                    const std::string& path);

} // namespace minv
