#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace slideflow {

// Dense row-major 2-D tensor of doubles. Vectors are 1xN or Nx1 as convenient.
// Heavy kernels (matmul variants) are delegated to Eigen maps over the raw
// buffer; everything else is plain loops.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Tensor2 from(std::initializer_list<std::initializer_list<double>> rows);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
    std::span<const double> row(std::size_t r) const { return {row_ptr(r), cols}; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    std::string shape_str() const;  // "RxC", for error messages
};

// C = A * B. Shapes (m,k)x(k,n) -> (m,n); mismatch -> ShapeError.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// C = A^T * B. Shapes (k,m)x(k,n) -> (m,n).
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
// C = A * B^T. Shapes (m,k)x(n,k) -> (m,n).
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);

Tensor2 transpose(const Tensor2& a);

void add_inplace(Tensor2& dst, const Tensor2& src);          // dst += src
void axpy_inplace(Tensor2& dst, double s, const Tensor2& x); // dst += s * x
void scale_inplace(Tensor2& dst, double s);
Tensor2 add(const Tensor2& a, const Tensor2& b);
Tensor2 sub(const Tensor2& a, const Tensor2& b);
Tensor2 hadamard(const Tensor2& a, const Tensor2& b);
Tensor2 scaled(const Tensor2& a, double s);

// Sum over rows -> 1xC.
Tensor2 col_sum(const Tensor2& a);

double sum_all(const Tensor2& a);
double frobenius_norm(const Tensor2& a);

// Multiply-accumulate counter for the matmul family. The scaling benchmark's
// cost model is "MACs per forward", so the counter only tracks GEMM work.
std::uint64_t mac_count();
void reset_mac_count();

}  // namespace slideflow
