#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace minv {

// Dense row-major tensor of 64-bit floats. Scalars are rank-0 (size 1).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, double v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    // 2-D accessors
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double item() const;
    bool all_finite() const;

    double min() const;
    double max() const;
    double sum() const;

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// elementwise / linear algebra helpers on plain tensors
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
void axpy(double a, const Tensor& x, Tensor& y); // y += a*x

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);

// C = A*B, A [m,k], B [k,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A*B^T, A [m,k], B [n,k]
Tensor matmul_bt(const Tensor& a, const Tensor& b);
// C = A^T*B, A [k,m], B [k,n]
Tensor matmul_at(const Tensor& a, const Tensor& b);

// adds row vector [n] to every row of M [m,n]
Tensor add_rowvec(const Tensor& m, const Tensor& row);

std::size_t shape_product(const std::vector<std::size_t>& shape);

} // namespace minv
