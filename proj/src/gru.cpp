#include "hydrobatch/gru.hpp"

#include <cmath>
#include <random>

namespace hydrobatch {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill_rows_with_bias(Matrix& m, const Vector& b) {
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (int j = 0; j < m.cols; ++j) row[j] = b[i];
    }
}

// gathers step t of every segment into an F x B staging matrix
void gather_inputs(const Matrix& X, std::span<const int> starts, int t, Matrix& x_t) {
    const int batch = static_cast<int>(starts.size());
    for (int b = 0; b < batch; ++b) {
        const double* src = X.row(starts[b] + t);
        for (int f = 0; f < X.cols; ++f) x_t(f, b) = src[f];
    }
}

// one batched recurrence step: h_prev (hs x B) -> h_next, gate values stored
// into the provided matrices
void step_gates(const GruModel& m, const Matrix& x_t, const Matrix& h_prev, Matrix& z, Matrix& r,
                Matrix& rh, Matrix& hcand, Matrix& h_next) {
    fill_rows_with_bias(z, m.b_z);
    gemm_nn_acc(m.w_z, x_t, z);
    gemm_nn_acc(m.u_z, h_prev, z);
    for (double& v : z.data) v = sigmoid(v);

    fill_rows_with_bias(r, m.b_r);
    gemm_nn_acc(m.w_r, x_t, r);
    gemm_nn_acc(m.u_r, h_prev, r);
    for (double& v : r.data) v = sigmoid(v);

    for (size_t i = 0; i < rh.data.size(); ++i) rh.data[i] = r.data[i] * h_prev.data[i];

    fill_rows_with_bias(hcand, m.b_h);
    gemm_nn_acc(m.w_h, x_t, hcand);
    gemm_nn_acc(m.u_h, rh, hcand);
    for (double& v : hcand.data) v = std::tanh(v);

    for (size_t i = 0; i < h_next.data.size(); ++i)
        h_next.data[i] = (1.0 - z.data[i]) * h_prev.data[i] + z.data[i] * hcand.data[i];
}

void emit_outputs(const GruModel& m, const Matrix& h, Matrix& y_t, std::vector<Matrix>& yhat,
                  int t) {
    fill_rows_with_bias(y_t, m.b_out);
    gemm_nn_acc(m.w_out, h, y_t);
    const int batch = y_t.cols;
    for (int b = 0; b < batch; ++b)
        for (int v = 0; v < m.output_size; ++v) yhat[b](t, v) = y_t(v, b);
}

void check_forward_args(const GruModel& m, const Matrix& X, std::span<const int> starts, int steps,
                        int h0_rows, int h0_cols) {
    m.check_consistent();
    require(steps >= 1, "segment forward: steps must be >= 1");
    require(X.cols == m.input_size, "segment forward: input width mismatch");
    require(h0_rows == m.hidden_size && h0_cols == static_cast<int>(starts.size()),
            "segment forward: h0 shape mismatch");
    for (int s : starts)
        require(s >= 0 && s + steps <= X.rows, "segment forward: segment out of range");
}

}  // namespace

GruModel::GruModel(int input, int hidden, int output)
    : input_size(input),
      hidden_size(hidden),
      output_size(output),
      w_z(hidden, input),
      w_r(hidden, input),
      w_h(hidden, input),
      u_z(hidden, hidden),
      u_r(hidden, hidden),
      u_h(hidden, hidden),
      b_z(hidden, 0.0),
      b_r(hidden, 0.0),
      b_h(hidden, 0.0),
      w_out(output, hidden),
      b_out(output, 0.0) {
    require(input >= 1 && hidden >= 1 && output >= 1, "GruModel: sizes must be >= 1");
}

std::array<std::span<double>, 11> GruModel::param_spans() {
    return {w_z.span(), w_r.span(), w_h.span(), u_z.span(), u_r.span(), u_h.span(),
            std::span<double>(b_z), std::span<double>(b_r), std::span<double>(b_h),
            w_out.span(), std::span<double>(b_out)};
}

std::array<std::span<const double>, 11> GruModel::param_spans() const {
    return {w_z.span(), w_r.span(), w_h.span(), u_z.span(), u_r.span(), u_h.span(),
            std::span<const double>(b_z), std::span<const double>(b_r),
            std::span<const double>(b_h), w_out.span(), std::span<const double>(b_out)};
}

size_t GruModel::param_count() const {
    size_t n = 0;
    for (auto s : param_spans()) n += s.size();
    return n;
}

void GruModel::check_consistent() const {
    const int f = input_size, hs = hidden_size, v = output_size;
    require(f >= 1 && hs >= 1 && v >= 1, "GruModel: sizes must be >= 1");
    auto mat = [&](const Matrix& m, int r, int c) { return m.rows == r && m.cols == c; };
    require(mat(w_z, hs, f) && mat(w_r, hs, f) && mat(w_h, hs, f), "GruModel: W shape mismatch");
    require(mat(u_z, hs, hs) && mat(u_r, hs, hs) && mat(u_h, hs, hs), "GruModel: U shape mismatch");
    require(static_cast<int>(b_z.size()) == hs && static_cast<int>(b_r.size()) == hs &&
                static_cast<int>(b_h.size()) == hs,
            "GruModel: bias length mismatch");
    require(mat(w_out, v, hs) && static_cast<int>(b_out.size()) == v,
            "GruModel: output head shape mismatch");
}

void zero_grads(GruGrads& g) {
    for (auto s : g.param_spans())
        for (double& x : s) x = 0.0;
}

void scale_grads(GruGrads& g, double s) {
    for (auto sp : g.param_spans())
        for (double& x : sp) x *= s;
}

GruModel init_params(uint64_t seed, int input_size, int hidden_size, int output_size) {
    GruModel m(input_size, hidden_size, output_size);
    std::mt19937_64 rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    std::uniform_real_distribution<double> u(-k, k);
    for (Matrix* w : {&m.w_z, &m.w_r, &m.w_h, &m.u_z, &m.u_r, &m.u_h, &m.w_out})
        for (double& x : w->data) x = u(rng);
    return m;  // biases stay zero
}

void SegmentCache::resize(const GruModel& m, int steps_, int batch_) {
    steps = steps_;
    batch = batch_;
    auto size_list = [&](std::vector<Matrix>& v, int n, int rows) {
        v.resize(n);
        for (auto& mat : v)
            if (mat.rows != rows || mat.cols != batch_) mat.resize(rows, batch_);
    };
    size_list(h, steps_ + 1, m.hidden_size);
    size_list(z, steps_, m.hidden_size);
    size_list(r, steps_, m.hidden_size);
    size_list(hcand, steps_, m.hidden_size);
    size_list(rh, steps_, m.hidden_size);
    size_list(x, steps_, m.input_size);
}

void BackwardScratch::resize(const GruModel& m, int batch) {
    for (Matrix* p : {&dh, &dhprev, &dz, &dhc, &da, &drh, &dr})
        if (p->rows != m.hidden_size || p->cols != batch) p->resize(m.hidden_size, batch);
    if (dy.rows != m.output_size || dy.cols != batch) dy.resize(m.output_size, batch);
}

void gru_cell_forward(const GruModel& m, std::span<const double> x, std::span<const double> h_prev,
                      std::span<double> h_next, std::span<double> y) {
    m.check_consistent();
    require(static_cast<int>(x.size()) == m.input_size, "gru_cell_forward: x length mismatch");
    require(static_cast<int>(h_prev.size()) == m.hidden_size &&
                static_cast<int>(h_next.size()) == m.hidden_size,
            "gru_cell_forward: hidden length mismatch");
    require(static_cast<int>(y.size()) == m.output_size, "gru_cell_forward: y length mismatch");
    const int hs = m.hidden_size, f = m.input_size;

    auto gate_pre = [&](const Matrix& w, const Matrix& u, const Vector& b,
                        std::span<const double> hvals, int i) {
        double s = b[i];
        const double* wr = w.row(i);
        for (int j = 0; j < f; ++j) s += wr[j] * x[j];
        const double* ur = u.row(i);
        for (int j = 0; j < hs; ++j) s += ur[j] * hvals[j];
        return s;
    };

    Vector rh(hs);
    for (int i = 0; i < hs; ++i) {
        const double r = sigmoid(gate_pre(m.w_r, m.u_r, m.b_r, h_prev, i));
        rh[i] = r * h_prev[i];
    }
    for (int i = 0; i < hs; ++i) {
        const double z = sigmoid(gate_pre(m.w_z, m.u_z, m.b_z, h_prev, i));
        const double hc = std::tanh(gate_pre(m.w_h, m.u_h, m.b_h, rh, i));
        h_next[i] = (1.0 - z) * h_prev[i] + z * hc;
    }
    for (int v = 0; v < m.output_size; ++v) {
        double s = m.b_out[v];
        const double* wr = m.w_out.row(v);
        for (int j = 0; j < hs; ++j) s += wr[j] * h_next[j];
        y[v] = s;
    }
}

void gru_forward_train(const GruModel& m, const Matrix& X, std::span<const int> starts, int steps,
                       const Matrix& h0, std::vector<Matrix>& yhat, SegmentCache& cache) {
    check_forward_args(m, X, starts, steps, h0.rows, h0.cols);
    const int batch = static_cast<int>(starts.size());
    cache.resize(m, steps, batch);
    cache.h[0] = h0;
    yhat.resize(batch);
    for (auto& y : yhat)
        if (y.rows != steps || y.cols != m.output_size) y.resize(steps, m.output_size);

    Matrix y_t(m.output_size, batch);
    for (int t = 0; t < steps; ++t) {
        gather_inputs(X, starts, t, cache.x[t]);
        step_gates(m, cache.x[t], cache.h[t], cache.z[t], cache.r[t], cache.rh[t], cache.hcand[t],
                   cache.h[t + 1]);
        emit_outputs(m, cache.h[t + 1], y_t, yhat, t);
    }
    if (!all_finite(cache.h[steps].span()))
        throw std::runtime_error("gru forward: non-finite hidden state");
}

void gru_forward_infer(const GruModel& m, const Matrix& X, std::span<const int> starts, int steps,
                       Matrix& h_state, std::vector<Matrix>& yhat) {
    check_forward_args(m, X, starts, steps, h_state.rows, h_state.cols);
    const int batch = static_cast<int>(starts.size());
    yhat.resize(batch);
    for (auto& y : yhat)
        if (y.rows != steps || y.cols != m.output_size) y.resize(steps, m.output_size);

    Matrix x_t(m.input_size, batch);
    Matrix z(m.hidden_size, batch), r(m.hidden_size, batch), rh(m.hidden_size, batch),
        hc(m.hidden_size, batch), h_next(m.hidden_size, batch);
    Matrix y_t(m.output_size, batch);
    for (int t = 0; t < steps; ++t) {
        gather_inputs(X, starts, t, x_t);
        step_gates(m, x_t, h_state, z, r, rh, hc, h_next);
        std::swap(h_state, h_next);
        emit_outputs(m, h_state, y_t, yhat, t);
    }
    if (!all_finite(h_state.span()))
        throw std::runtime_error("gru forward: non-finite hidden state");
}

void gru_backward_batch(const GruModel& m, const SegmentCache& cache,
                        const std::vector<Matrix>& dyhat, GruGrads& grads,
                        BackwardScratch& s) {
    require(static_cast<int>(dyhat.size()) == cache.batch, "gru backward: dyhat batch mismatch");
    require(grads.input_size == m.input_size && grads.hidden_size == m.hidden_size &&
                grads.output_size == m.output_size,
            "gru backward: grads shape mismatch");
    for (const auto& dy : dyhat)
        require(dy.rows == cache.steps && dy.cols == m.output_size,
                "gru backward: dyhat shape mismatch");
    const int batch = cache.batch;
    s.resize(m, batch);
    s.dh.fill(0.0);

    auto hadamard_into = [](const Matrix& a, const Matrix& b, Matrix& out) {
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    };

    for (int t = cache.steps - 1; t >= 0; --t) {
        const Matrix& h_prev = cache.h[t];
        const Matrix& h_next = cache.h[t + 1];
        const Matrix& z = cache.z[t];
        const Matrix& r = cache.r[t];
        const Matrix& hc = cache.hcand[t];

        // output head
        for (int b = 0; b < batch; ++b)
            for (int v = 0; v < m.output_size; ++v) s.dy(v, b) = dyhat[b](t, v);
        gemm_nt_acc(s.dy, h_next, grads.w_out);
        row_sums_acc(s.dy, grads.b_out);
        gemm_tn_acc(m.w_out, s.dy, s.dh);

        // h_next = (1-z).h_prev + z.hc
        for (size_t i = 0; i < s.dz.data.size(); ++i) {
            const double dh = s.dh.data[i];
            s.dz.data[i] = dh * (hc.data[i] - h_prev.data[i]);
            s.dhc.data[i] = dh * z.data[i];
            s.dhprev.data[i] = dh * (1.0 - z.data[i]);
        }

        // candidate: hc = tanh(W_h x + U_h (r.h_prev) + b_h)
        for (size_t i = 0; i < s.da.data.size(); ++i)
            s.da.data[i] = s.dhc.data[i] * (1.0 - hc.data[i] * hc.data[i]);
        gemm_nt_acc(s.da, cache.x[t], grads.w_h);
        gemm_nt_acc(s.da, cache.rh[t], grads.u_h);
        row_sums_acc(s.da, grads.b_h);
        s.drh.fill(0.0);
        gemm_tn_acc(m.u_h, s.da, s.drh);
        hadamard_into(s.drh, h_prev, s.dr);
        for (size_t i = 0; i < s.dhprev.data.size(); ++i)
            s.dhprev.data[i] += s.drh.data[i] * r.data[i];

        // reset gate
        for (size_t i = 0; i < s.da.data.size(); ++i)
            s.da.data[i] = s.dr.data[i] * r.data[i] * (1.0 - r.data[i]);
        gemm_nt_acc(s.da, cache.x[t], grads.w_r);
        gemm_nt_acc(s.da, h_prev, grads.u_r);
        row_sums_acc(s.da, grads.b_r);
        gemm_tn_acc(m.u_r, s.da, s.dhprev);

        // update gate
        for (size_t i = 0; i < s.da.data.size(); ++i)
            s.da.data[i] = s.dz.data[i] * z.data[i] * (1.0 - z.data[i]);
        gemm_nt_acc(s.da, cache.x[t], grads.w_z);
        gemm_nt_acc(s.da, h_prev, grads.u_z);
        row_sums_acc(s.da, grads.b_z);
        gemm_tn_acc(m.u_z, s.da, s.dhprev);

        std::swap(s.dh, s.dhprev);
        // dL/dh0 is discarded at t == 0: truncation at the segment boundary
    }
}

SegmentForward gru_segment_forward(const GruModel& m, const Matrix& X_seg, const Vector& h0) {
    require(static_cast<int>(h0.size()) == m.hidden_size, "segment forward: h0 length mismatch");
    SegmentForward out;
    Matrix h0m(m.hidden_size, 1);
    for (int i = 0; i < m.hidden_size; ++i) h0m(i, 0) = h0[i];
    const int starts[1] = {0};
    std::vector<Matrix> yhat;
    gru_forward_train(m, X_seg, starts, X_seg.rows, h0m, yhat, out.cache);
    out.yhat = std::move(yhat[0]);
    out.h_last.resize(m.hidden_size);
    for (int i = 0; i < m.hidden_size; ++i) out.h_last[i] = out.cache.h[X_seg.rows](i, 0);
    return out;
}

GruGrads gru_segment_backward(const GruModel& m, const SegmentCache& cache, const Matrix& dyhat) {
    GruGrads grads(m.input_size, m.hidden_size, m.output_size);
    BackwardScratch scratch;
    std::vector<Matrix> dys(1);
    dys[0] = dyhat;
    gru_backward_batch(m, cache, dys, grads, scratch);
    return grads;
}

}  // namespace hydrobatch
