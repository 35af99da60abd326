#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrobatch {

// Dense row-major matrix of 64-bit floats. Small sizes throughout (hs=32,
// batch<=64), so everything is plain contiguous storage + tight loops.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimension");
    }

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    std::span<double> span() { return {data.data(), data.size()}; }
    std::span<const double> span() const { return {data.data(), data.size()}; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    void resize(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<size_t>(r) * c, 0.0);
    }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

using Vector = std::vector<double>;

void require(bool cond, const std::string& msg);

// C (m x n) += A (m x k) * B (k x n)
void gemm_nn_acc(const Matrix& a, const Matrix& b, Matrix& c);

// C (m x n) += A (m x k) * B^T, with B stored (n x k): dot over the shared
// contiguous k axis.
void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c);

// C (m x n) += A^T * B, with A stored (k x m), B stored (k x n)
void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);

// y (len m) += row sums of A (m x n)
void row_sums_acc(const Matrix& a, Vector& y);

bool all_finite(std::span<const double> xs);

}  // namespace hydrobatch
