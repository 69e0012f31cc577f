#include "image_io.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace minv {

void write_pgm_grid(const Tensor& images, std::size_t h, std::size_t w, std::size_t grid_cols,
                    const std::string& path) {
    Tensor batch = images;
    if (batch.rank() == 1)
        batch = Tensor({1, batch.size()},
                       std::vector<double>(images.data().begin(), images.data().end()));
    require(batch.rank() == 2, Errc::invalid_argument, "write_pgm_grid: expects [n, h*w]");
    require(batch.cols() == h * w, Errc::shape_mismatch,
            "write_pgm_grid: image size " + std::to_string(batch.cols()) + " != " +
                std::to_string(h) + "x" + std::to_string(w));
    const std::size_t n = batch.rows();
    require(n >= 1 && grid_cols >= 1, Errc::invalid_argument,
            "write_pgm_grid: empty batch or zero columns");
    require(batch.min() >= 0.0 && batch.max() <= 1.0, Errc::invalid_argument,
            "write_pgm_grid: pixels must lie in [0,1]");

    const std::size_t cols = std::min(grid_cols, n);
    const std::size_t rows = (n + cols - 1) / cols;
    const std::size_t width = cols * w + (cols - 1);
    const std::size_t height = rows * h + (rows - 1);

    std::vector<unsigned char> canvas(width * height, 255); // separators stay white
    auto data = batch.data();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            const std::size_t x0 = c * (w + 1);
            const std::size_t y0 = r * (h + 1);
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    double v = i < n ? data[i * h * w + y * w + x] : 0.0;
                    canvas[(y0 + y) * width + (x0 + x)] =
                        static_cast<unsigned char>(std::lround(v * 255.0));
                }
        }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), Errc::io, "cannot open '" + path + "' for writing");
    f << "P5\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(canvas.data()),
            static_cast<std::streamsize>(canvas.size()));
    require(f.good(), Errc::io, "write failed for '" + path + "'");
}

} // namespace minv
