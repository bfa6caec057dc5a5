#include "slideflow/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "slideflow/errors.hpp"

namespace slideflow {

namespace {

std::uint64_t g_macs = 0;

// out[0..n) = sum_k a[k] * B[k,0..n), accumulated in ascending k with a fixed
// 4-step block. Every output row of a product goes through the identical
// floating-point schedule regardless of its position or of the total row
// count, which is what makes permutation equivariance and locality hold
// bitwise rather than just to rounding error. (A packed/panelled GEMM routes
// remainder rows through different micro-kernels and breaks that.)
void row_times_matrix(const double* a, const double* b, std::size_t k, std::size_t n,
                      double* out) {
    std::fill(out, out + n, 0.0);
    const std::size_t kb = k - k % 4;
    for (std::size_t p = 0; p < kb; p += 4) {
        const double s0 = a[p], s1 = a[p + 1], s2 = a[p + 2], s3 = a[p + 3];
        const double* b0 = b + p * n;
        const double* b1 = b0 + n;
        const double* b2 = b1 + n;
        const double* b3 = b2 + n;
        for (std::size_t j = 0; j < n; ++j)
            out[j] += s0 * b0[j] + s1 * b1[j] + s2 * b2[j] + s3 * b3[j];
    }
    for (std::size_t p = kb; p < k; ++p) {
        const double s = a[p];
        const double* br = b + p * n;
        for (std::size_t j = 0; j < n; ++j) out[j] += s * br[j];
    }
}

}  // namespace

Tensor2 Tensor2::from(std::initializer_list<std::initializer_list<double>> init) {
    Tensor2 t;
    t.rows = init.size();
    t.cols = t.rows ? init.begin()->size() : 0;
    t.data.reserve(t.rows * t.cols);
    for (const auto& r : init) {
        require_shape(r.size() == t.cols, "Tensor2::from: ragged rows");
        t.data.insert(t.data.end(), r.begin(), r.end());
    }
    return t;
}

bool Tensor2::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor2::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    require_shape(a.cols == b.rows,
                  "matmul: inner dimensions differ (" + a.shape_str() + " * " + b.shape_str() + ")");
    Tensor2 c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        row_times_matrix(a.row_ptr(i), b.data.data(), a.cols, b.cols, c.row_ptr(i));
    g_macs += static_cast<std::uint64_t>(a.rows) * a.cols * b.cols;
    return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    require_shape(a.rows == b.rows,
                  "matmul_tn: row counts differ (" + a.shape_str() + "^T * " + b.shape_str() + ")");
    Tensor2 at = transpose(a);  // contiguous lhs rows; copy cost is O(km) vs O(kmn) work
    Tensor2 c(a.cols, b.cols);
    for (std::size_t i = 0; i < at.rows; ++i)
        row_times_matrix(at.row_ptr(i), b.data.data(), b.rows, b.cols, c.row_ptr(i));
    g_macs += static_cast<std::uint64_t>(a.cols) * a.rows * b.cols;
    return c;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    require_shape(a.cols == b.cols,
                  "matmul_nt: col counts differ (" + a.shape_str() + " * " + b.shape_str() + "^T)");
    Tensor2 bt = transpose(b);
    Tensor2 c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        row_times_matrix(a.row_ptr(i), bt.data.data(), a.cols, bt.cols, c.row_ptr(i));
    g_macs += static_cast<std::uint64_t>(a.rows) * a.cols * b.rows;
    return c;
}

Tensor2 transpose(const Tensor2& a) {
    Tensor2 c(a.cols, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = 0; k < a.cols; ++k) c.at(k, r) = a.at(r, k);
    return c;
}

void add_inplace(Tensor2& dst, const Tensor2& src) {
    require_shape(dst.same_shape(src), "add_inplace: shape mismatch");
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

void axpy_inplace(Tensor2& dst, double s, const Tensor2& x) {
    require_shape(dst.same_shape(x), "axpy_inplace: shape mismatch");
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += s * x.data[i];
}

void scale_inplace(Tensor2& dst, double s) {
    for (double& v : dst.data) v *= s;
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
    Tensor2 c = a;
    add_inplace(c, b);
    return c;
}

Tensor2 sub(const Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "sub: shape mismatch");
    Tensor2 c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

Tensor2 hadamard(const Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "hadamard: shape mismatch");
    Tensor2 c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
    return c;
}

Tensor2 scaled(const Tensor2& a, double s) {
    Tensor2 c = a;
    scale_inplace(c, s);
    return c;
}

Tensor2 col_sum(const Tensor2& a) {
    Tensor2 c(1, a.cols);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = 0; k < a.cols; ++k) c.data[k] += a.at(r, k);
    return c;
}

double sum_all(const Tensor2& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return s;
}

double frobenius_norm(const Tensor2& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

std::uint64_t mac_count() { return g_macs; }
void reset_mac_count() { g_macs = 0; }

}  // namespace slideflow
