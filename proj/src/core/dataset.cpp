#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "rng.hpp"

namespace minv {

void Dataset::validate() const {
    if (size() == 0) {
        require(images.empty(), Errc::invalid_argument, "empty dataset with image data");
        return;
    }
    require(images.rank() == 2 && images.rows() == size(), Errc::invalid_argument,
            "image count does not match label count");
    require(images.cols() == dim(), Errc::invalid_argument,
            "image width does not match rows*cols");
    for (std::int32_t l : labels)
        require(l >= 0 && static_cast<std::size_t>(l) < class_count(), Errc::invalid_argument,
                "label " + std::to_string(l) + " out of range for " +
                    std::to_string(class_count()) + " classes");
    if (unit_range)
        require(images.min() >= 0.0 && images.max() <= 1.0, Errc::invalid_argument,
                "pixel values outside [0,1]");
}

Tensor Dataset::image(std::size_t i) const {
    require(i < size(), Errc::invalid_argument, "image index out of range");
    auto d = images.data();
    return Tensor({dim()}, std::vector<double>(d.begin() + i * dim(), d.begin() + (i + 1) * dim()));
}

std::vector<std::size_t> Dataset::class_indices(std::int32_t label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(i);
    return out;
}

std::vector<std::size_t> Dataset::class_histogram() const {
    std::vector<std::size_t> h(class_count(), 0);
    for (std::int32_t l : labels) ++h[static_cast<std::size_t>(l)];
    return h;
}

std::string Dataset::provenance_id() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < prov.sources.size(); ++i)
        os << (i ? "+" : "") << prov.sources[i];
    for (const std::string& t : prov.transforms) os << "|" << t;
    return os.str();
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::uint32_t be32(const std::string& buf, std::size_t off, const std::string& path) {
    require(off + 4 <= buf.size(), Errc::truncated, "'" + path + "' is truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v = (v << 8) | static_cast<unsigned char>(buf[off + i]);
    return v;
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::string ibuf = read_file(images_path);
    const std::string lbuf = read_file(labels_path);

    const std::uint32_t imagic = be32(ibuf, 0, images_path);
    require(imagic == 0x00000803u, Errc::format,
            "'" + images_path + "': IDX image magic mismatch (got 0x" +
                [&] { std::ostringstream o; o << std::hex << imagic; return o.str(); }() + ")");
    const std::uint32_t lmagic = be32(lbuf, 0, labels_path);
    require(lmagic == 0x00000801u, Errc::format,
            "'" + labels_path + "': IDX label magic mismatch");

    const std::uint32_t n = be32(ibuf, 4, images_path);
    const std::uint32_t rows = be32(ibuf, 8, images_path);
    const std::uint32_t cols = be32(ibuf, 12, images_path);
    const std::uint32_t nl = be32(lbuf, 4, labels_path);
    require(n == nl, Errc::format,
            "IDX item count mismatch: " + std::to_string(n) + " images vs " + std::to_string(nl) +
                " labels");
    require(n > 0, Errc::format, "IDX files contain no items");

    const std::size_t npix = static_cast<std::size_t>(n) * rows * cols;
    require(ibuf.size() >= 16 + npix, Errc::truncated,
            "'" + images_path + "' is truncated (expected " + std::to_string(16 + npix) +
                " bytes, have " + std::to_string(ibuf.size()) + ")");
    require(lbuf.size() >= 8 + n, Errc::truncated, "'" + labels_path + "' is truncated");

    Dataset d;
    d.rows = rows;
    d.cols = cols;
    d.images = Tensor({n, static_cast<std::size_t>(rows) * cols});
    auto img = d.images.data();
    for (std::size_t i = 0; i < npix; ++i)
        img[i] = static_cast<unsigned char>(ibuf[16 + i]) / 255.0;

    std::int32_t max_label = 0;
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = static_cast<unsigned char>(lbuf[8 + i]);
        max_label = std::max(max_label, d.labels[i]);
    }
    for (std::int32_t c = 0; c <= max_label; ++c) d.class_names.push_back(std::to_string(c));

    d.prov.sources.push_back(images_path);
    d.validate();
    return d;
}

Dataset subset_classes(const Dataset& d, const std::vector<std::int32_t>& keep, bool relabel) {
    require(!keep.empty(), Errc::invalid_argument, "subset: keep list is empty");
    std::vector<std::int32_t> remap(d.class_count(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        require(keep[i] >= 0 && static_cast<std::size_t>(keep[i]) < d.class_count(),
                Errc::invalid_argument,
                "subset: class " + std::to_string(keep[i]) + " not present in dataset");
        require(remap[keep[i]] == -1, Errc::invalid_argument,
                "subset: class " + std::to_string(keep[i]) + " listed twice");
        remap[keep[i]] = static_cast<std::int32_t>(i);
    }

    Dataset out;
    out.rows = d.rows;
    out.cols = d.cols;
    out.unit_range = d.unit_range;
    out.prov = d.prov;
    {
        std::ostringstream os;
        os << "subset keep=";
        for (std::size_t i = 0; i < keep.size(); ++i) os << (i ? "," : "") << keep[i];
        os << (relabel ? " relabel" : "");
        out.prov.transforms.push_back(os.str());
    }

    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (remap[d.labels[i]] != -1) picked.push_back(i);

    if (relabel) {
        for (std::int32_t c : keep) out.class_names.push_back(d.class_names[c]);
    } else {
        out.class_names = d.class_names;
    }
    if (picked.empty()) return out;

    out.images = Tensor({picked.size(), d.dim()});
    auto src = d.images.data();
    auto dst = out.images.data();
    out.labels.resize(picked.size());
    for (std::size_t k = 0; k < picked.size(); ++k) {
        const std::size_t i = picked[k];
        std::copy(src.begin() + i * d.dim(), src.begin() + (i + 1) * d.dim(),
                  dst.begin() + k * d.dim());
        out.labels[k] = relabel ? remap[d.labels[i]] : d.labels[i];
    }
    out.validate();
    return out;
}

Dataset merge(const Dataset& d1, const Dataset& d2) {
    if (d2.size() == 0 && d2.class_count() == 0) return d1;
    if (d1.size() == 0 && d1.class_count() == 0) return d2;
    require(d1.dim() == d2.dim() && d1.rows == d2.rows && d1.cols == d2.cols,
            Errc::shape_mismatch,
            "merge: image dimensions differ (" + std::to_string(d1.rows) + "x" +
                std::to_string(d1.cols) + " vs " + std::to_string(d2.rows) + "x" +
                std::to_string(d2.cols) + ")");

    Dataset out;
    out.rows = d1.rows;
    out.cols = d1.cols;
    out.unit_range = d1.unit_range && d2.unit_range;
    out.class_names = d1.class_names;
    out.class_names.insert(out.class_names.end(), d2.class_names.begin(), d2.class_names.end());

    const std::int32_t offset = static_cast<std::int32_t>(d1.class_count());
    out.labels = d1.labels;
    for (std::int32_t l : d2.labels) out.labels.push_back(l + offset);

    out.images = Tensor({d1.size() + d2.size(), d1.dim()});
    auto dst = out.images.data();
    auto s1 = d1.images.data();
    auto s2 = d2.images.data();
    std::copy(s1.begin(), s1.end(), dst.begin());
    std::copy(s2.begin(), s2.end(), dst.begin() + s1.size());

    out.prov.sources = d1.prov.sources;
    out.prov.sources.insert(out.prov.sources.end(), d2.prov.sources.begin(),
                            d2.prov.sources.end());
    out.prov.transforms.push_back("merge offset=" + std::to_string(offset));
    out.validate();
    return out;
}

// ---- procedural glyphs ----

namespace {

// Predicates on normalized coordinates u,v in (0,1); t is stroke half-width.
struct Shape {
    const char* name;
    std::function<bool(double, double, double)> hit;
};

const std::vector<Shape>& shape_table() {
    auto band = [](double a, double c, double t) { return std::abs(a - c) <= t; };
    auto inside = [](double u, double v, double lo, double hi) {
        return u >= lo && u <= hi && v >= lo && v <= hi;
    };
    static const std::vector<Shape> shapes = {
        {"hbar", [=](double u, double v, double t) { (void)u; return band(v, 0.5, t); }},
        {"vbar", [=](double u, double v, double t) { (void)v; return band(u, 0.5, t); }},
        {"cross", [=](double u, double v, double t) { return band(v, 0.5, t) || band(u, 0.5, t); }},
        {"diag", [=](double u, double v, double t) { return std::abs(u - v) <= t * 1.4; }},
        {"antidiag", [=](double u, double v, double t) { return std::abs(u + v - 1.0) <= t * 1.4; }},
        {"x", [=](double u, double v, double t) {
             return std::abs(u - v) <= t * 1.4 || std::abs(u + v - 1.0) <= t * 1.4;
         }},
        {"box", [=](double u, double v, double t) {
             bool outer = inside(u, v, 0.18, 0.82);
             bool inner = inside(u, v, 0.18 + 2 * t, 0.82 - 2 * t);
             return outer && !inner;
         }},
        {"block", [=](double u, double v, double t) { (void)t; return inside(u, v, 0.28, 0.72); }},
        {"ring", [=](double u, double v, double t) {
             double r = std::hypot(u - 0.5, v - 0.5);
             return std::abs(r - 0.3) <= t;
         }},
        {"disc", [=](double u, double v, double t) {
             (void)t;
             return std::hypot(u - 0.5, v - 0.5) <= 0.3;
         }},
        {"tee", [=](double u, double v, double t) {
             return (v <= 0.2 + t && v >= 0.1) || (band(u, 0.5, t) && v >= 0.1 && v <= 0.9);
         }},
        {"ell", [=](double u, double v, double t) {
             return (band(u, 0.25, t) && v >= 0.1 && v <= 0.9) ||
                    (v >= 0.9 - 2 * t && v <= 0.9 && u >= 0.25 && u <= 0.8);
         }},
        {"u", [=](double u, double v, double t) {
             return ((band(u, 0.25, t) || band(u, 0.75, t)) && v >= 0.1 && v <= 0.9) ||
                    (v >= 0.9 - 2 * t && v <= 0.9 && u >= 0.25 && u <= 0.75);
         }},
        {"h", [=](double u, double v, double t) {
             return ((band(u, 0.25, t) || band(u, 0.75, t)) && v >= 0.1 && v <= 0.9) ||
                    (band(v, 0.5, t) && u >= 0.25 && u <= 0.75);
         }},
        {"zee", [=](double u, double v, double t) {
             return (v <= 0.2 && v >= 0.2 - 2 * t) || (v >= 0.8 && v <= 0.8 + 2 * t) ||
                    (std::abs(u + v - 1.0) <= t * 1.4 && v >= 0.2 && v <= 0.8);
         }},
        {"tri", [=](double u, double v, double t) { (void)t; return v >= 0.2 && u <= v - 0.1; }},
        {"dots", [=](double u, double v, double t) {
             (void)t;
             return std::hypot(u - 0.3, v - 0.3) <= 0.14 || std::hypot(u - 0.7, v - 0.3) <= 0.14 ||
                    std::hypot(u - 0.3, v - 0.7) <= 0.14 || std::hypot(u - 0.7, v - 0.7) <= 0.14;
         }},
        {"checker", [=](double u, double v, double t) {
             (void)t;
             bool left = u < 0.5, top = v < 0.5;
             return inside(u, v, 0.1, 0.9) && (left == top);
         }},
        {"boxdot", [=](double u, double v, double t) {
             bool outer = inside(u, v, 0.15, 0.85);
             bool inner = inside(u, v, 0.15 + 2 * t, 0.85 - 2 * t);
             return (outer && !inner) || std::hypot(u - 0.5, v - 0.5) <= 0.15;
         }},
        {"vee", [=](double u, double v, double t) {
             return (std::abs((u - 0.5) - (0.9 - v) * 0.45) <= t * 1.2 ||
                     std::abs((u - 0.5) + (0.9 - v) * 0.45) <= t * 1.2) &&
                    v >= 0.1 && v <= 0.9;
         }},
    };
    return shapes;
}

} // namespace

std::size_t glyph_shape_count() {
    return shape_table().size();
}

Dataset synth_glyphs(std::size_t class_count, std::size_t per_class, std::size_t size,
                     std::uint64_t seed) {
    const auto& shapes = shape_table();
    require(class_count >= 1, Errc::invalid_argument, "synth_glyphs: class_count must be >= 1");
    require(class_count <= shapes.size(), Errc::invalid_argument,
            "synth_glyphs: only " + std::to_string(shapes.size()) +
                " shape generators available, requested " + std::to_string(class_count));
    require(per_class >= 1 && size >= 8, Errc::invalid_argument,
            "synth_glyphs: per_class must be >= 1 and size >= 8");

    Dataset d;
    d.rows = d.cols = size;
    d.images = Tensor({class_count * per_class, size * size});
    d.labels.resize(class_count * per_class);
    auto img = d.images.data();

    const double stroke = 0.07;
    std::size_t idx = 0;
    for (std::size_t c = 0; c < class_count; ++c) {
        d.class_names.push_back(shapes[c].name);
        for (std::size_t k = 0; k < per_class; ++k, ++idx) {
            Rng rng(derive_seed(seed, "glyph", c * 1000003ULL + k));
            const double du = rng.uniform(-0.06, 0.06);
            const double dv = rng.uniform(-0.06, 0.06);
            const double intensity = rng.uniform(0.78, 1.0);
            double* px = img.data() + idx * size * size;
            for (std::size_t y = 0; y < size; ++y) {
                for (std::size_t x = 0; x < size; ++x) {
                    const double u = (x + 0.5) / size - du;
                    const double v = (y + 0.5) / size - dv;
                    double val = shapes[c].hit(u, v, stroke) ? intensity : 0.0;
                    val += rng.uniform(0.0, 0.05);
                    px[y * size + x] = std::min(1.0, std::max(0.0, val));
                }
            }
            d.labels[idx] = static_cast<std::int32_t>(c);
        }
    }
    d.prov.sources.push_back("synth-glyphs(classes=" + std::to_string(class_count) + ",per=" +
                             std::to_string(per_class) + ",size=" + std::to_string(size) +
                             ",seed=" + std::to_string(seed) + ")");
    d.validate();
    return d;
}

Dataset synth_modes(const std::vector<std::array<double, 2>>& centers, std::size_t per_mode,
                    double sigma, std::uint64_t seed) {
    require(!centers.empty() && per_mode >= 1, Errc::invalid_argument,
            "synth_modes: need at least one mode and one sample");
    require(sigma >= 0.0, Errc::invalid_argument, "synth_modes: sigma must be >= 0");

    Dataset d;
    d.rows = 1;
    d.cols = 2;
    d.unit_range = false;
    d.images = Tensor({centers.size() * per_mode, 2});
    d.labels.resize(centers.size() * per_mode);
    auto img = d.images.data();

    Rng rng(derive_seed(seed, "modes"));
    std::size_t idx = 0;
    for (std::size_t m = 0; m < centers.size(); ++m) {
        d.class_names.push_back("mode" + std::to_string(m));
        for (std::size_t k = 0; k < per_mode; ++k, ++idx) {
            img[idx * 2 + 0] = centers[m][0] + sigma * rng.normal();
            img[idx * 2 + 1] = centers[m][1] + sigma * rng.normal();
            d.labels[idx] = static_cast<std::int32_t>(m);
        }
    }
    d.prov.sources.push_back("synth-modes(modes=" + std::to_string(centers.size()) + ",per=" +
                             std::to_string(per_mode) + ",seed=" + std::to_string(seed) + ")");
    d.validate();
    return d;
}

double nearest_sample_distance(const Dataset& d, std::int32_t label, const Tensor& x) {
    require(x.size() == d.dim(), Errc::shape_mismatch,
            "nearest_sample_distance: dimension mismatch");
    auto img = d.images.data();
    auto xd = x.data();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.labels[i] != label) continue;
        double s = 0.0;
        const double* row = img.data() + i * d.dim();
        for (std::size_t j = 0; j < d.dim(); ++j) {
            const double diff = row[j] - xd[j];
            s += diff * diff;
        }
        best = std::min(best, s);
    }
    require(std::isfinite(best), Errc::invalid_argument,
            "nearest_sample_distance: no samples with label " + std::to_string(label));
    return std::sqrt(best);
}

} // namespace minv
