#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace minv {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    for (std::size_t d : shape_)
        require(d > 0, Errc::invalid_argument, "tensor dimensions must be positive");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    require(shape_product(shape_) == data_.size(), Errc::shape_mismatch,
            "tensor data length does not match shape");
}

Tensor Tensor::scalar(double v) {
    Tensor t;
    t.data_.assign(1, v);
    return t;
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

std::size_t Tensor::rows() const {
    require(rank() == 2, Errc::shape_mismatch, "rows(): tensor is not 2-D");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    require(rank() == 2, Errc::shape_mismatch, "cols(): tensor is not 2-D");
    return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    return data_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
}

double Tensor::item() const {
    require(size() == 1, Errc::shape_mismatch, "item(): tensor is not a scalar");
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::min() const {
    require(!empty(), Errc::invalid_argument, "min(): empty tensor");
    return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
    require(!empty(), Errc::invalid_argument, "max(): empty tensor");
    return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
    return std::accumulate(data_.begin(), data_.end(), 0.0);
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << 'x';
        os << shape_[i];
    }
    os << ']';
    return os.str();
}

namespace {

void check_same(const Tensor& a, const Tensor& b, const char* op) {
    require(a.same_shape(b), Errc::shape_mismatch,
            std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same(a, b, "add");
    Tensor out = a;
    auto d = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += bd[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same(a, b, "sub");
    Tensor out = a;
    auto d = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= bd[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same(a, b, "mul");
    Tensor out = a;
    auto d = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= bd[i];
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    for (double& v : out.data()) v *= c;
    return out;
}

void axpy(double a, const Tensor& x, Tensor& y) {
    check_same(x, y, "axpy");
    auto xd = x.data();
    auto yd = y.data();
    for (std::size_t i = 0; i < xd.size(); ++i) yd[i] += a * xd[i];
}

double dot(const Tensor& a, const Tensor& b) {
    check_same(a, b, "dot");
    double s = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) s += ad[i] * bd[i];
    return s;
}

double norm2(const Tensor& a) {
    return std::sqrt(dot(a, a));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, Errc::shape_mismatch, "matmul: operands must be 2-D");
    require(a.cols() == b.rows(), Errc::shape_mismatch,
            "matmul: inner dimensions " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c({m, n});
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ad + i * k;
        double* crow = cd + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = bd + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, Errc::shape_mismatch, "matmul_bt: operands must be 2-D");
    require(a.cols() == b.cols(), Errc::shape_mismatch,
            "matmul_bt: inner dimensions " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor c({m, n});
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ad + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = bd + j * k;
            double s = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
            cd[i * n + j] = s;
        }
    }
    return c;
}

Tensor matmul_at(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, Errc::shape_mismatch, "matmul_at: operands must be 2-D");
    require(a.rows() == b.rows(), Errc::shape_mismatch,
            "matmul_at: inner dimensions " + a.shape_str() + " vs " + b.shape_str());
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    Tensor c({m, n});
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* arow = ad + kk * m;
        const double* brow = bd + kk * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = cd + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor add_rowvec(const Tensor& m, const Tensor& row) {
    require(m.rank() == 2 && row.rank() == 1, Errc::shape_mismatch,
            "add_rowvec: expects matrix and vector");
    require(m.cols() == row.shape()[0], Errc::shape_mismatch,
            "add_rowvec: width mismatch " + m.shape_str() + " vs " + row.shape_str());
    Tensor out = m;
    const std::size_t r = m.rows(), c = m.cols();
    auto od = out.data();
    auto rd = row.data();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) od[i * c + j] += rd[j];
    return out;
}

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::shape_mismatch:   return "shape_mismatch";
        case Errc::numeric:          return "numeric";
        case Errc::io:               return "io";
        case Errc::format:           return "format";
        case Errc::version:          return "version";
        case Errc::checksum:         return "checksum";
        case Errc::truncated:        return "truncated";
        case Errc::config:           return "config";
    }
    return "unknown";
}

} // namespace minv
