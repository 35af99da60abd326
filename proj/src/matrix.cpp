#include "hydrobatch/matrix.hpp"

#include <cmath>

namespace hydrobatch {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void gemm_nn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    require(a.cols == b.rows && a.rows == c.rows && b.cols == c.cols, "gemm_nn: shape mismatch");
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        int l = 0;
        // unroll over k so several rows of B stream through the n-wide fma loop
        for (; l + 4 <= k; l += 4) {
            const double a0 = ai[l], a1 = ai[l + 1], a2 = ai[l + 2], a3 = ai[l + 3];
            const double* b0 = b.row(l);
            const double* b1 = b.row(l + 1);
            const double* b2 = b.row(l + 2);
            const double* b3 = b.row(l + 3);
            for (int j = 0; j < n; ++j) ci[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
        }
        for (; l < k; ++l) {
            const double al = ai[l];
            const double* bl = b.row(l);
            for (int j = 0; j < n; ++j) ci[j] += al * bl[j];
        }
    }
}

void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    require(a.cols == b.cols && a.rows == c.rows && b.rows == c.cols, "gemm_nt: shape mismatch");
    const int m = a.rows, k = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < n; ++j) {
            const double* bj = b.row(j);
            // eight independent partial sums; lane-parallel, fixed order
            double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            int l = 0;
            for (; l + 8 <= k; l += 8)
                for (int q = 0; q < 8; ++q) s[q] += ai[l + q] * bj[l + q];
            double tail = 0.0;
            for (; l < k; ++l) tail += ai[l] * bj[l];
            ci[j] += ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7])) + tail;
        }
    }
}

void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    require(a.rows == b.rows && a.cols == c.rows && b.cols == c.cols, "gemm_tn: shape mismatch");
    const int k = a.rows, m = a.cols, n = b.cols;
    for (int l = 0; l < k; ++l) {
        const double* al = a.row(l);
        const double* bl = b.row(l);
        for (int i = 0; i < m; ++i) {
            const double ali = al[i];
            double* ci = c.row(i);
            for (int j = 0; j < n; ++j) ci[j] += ali * bl[j];
        }
    }
}

void row_sums_acc(const Matrix& a, Vector& y) {
    require(static_cast<int>(y.size()) == a.rows, "row_sums: length mismatch");
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += ai[j];
        y[i] += s;
    }
}

bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace hydrobatch
