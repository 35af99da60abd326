#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hydrobatch/matrix.hpp"

namespace hydrobatch {

// Gate convention used everywhere (fixed so hand-computed test values are
// unambiguous):
//   z = sigmoid(W_z x + U_z h_prev + b_z)
//   r = sigmoid(W_r x + U_r h_prev + b_r)
//   hc = tanh(W_h x + U_h (r . h_prev) + b_h)
//   h_next = (1 - z) . h_prev + z . hc
//   y = W_out h_next + b_out
struct GruModel {
    int input_size = 0;   // F
    int hidden_size = 0;  // hs
    int output_size = 0;  // V

    Matrix w_z, w_r, w_h;  // hs x F
    Matrix u_z, u_r, u_h;  // hs x hs
    Vector b_z, b_r, b_h;  // hs
    Matrix w_out;          // V x hs
    Vector b_out;          // V

    GruModel() = default;
    GruModel(int input, int hidden, int output);

    // parameter blocks in a fixed order, for the optimizer / gradcheck /
    // serialization
    static constexpr std::array<std::string_view, 11> kParamNames = {
        "w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h", "w_out", "b_out"};
    std::array<std::span<double>, 11> param_spans();
    std::array<std::span<const double>, 11> param_spans() const;
    size_t param_count() const;

    void check_consistent() const;  // throws on dimension mismatch
};

// gradients are parameter-shaped
using GruGrads = GruModel;

void zero_grads(GruGrads& g);
void scale_grads(GruGrads& g, double s);

// uniform(-k, k) with k = 1/sqrt(hidden) for all matrices, zero biases;
// deterministic per seed
GruModel init_params(uint64_t seed, int input_size, int hidden_size, int output_size);

// Cached intermediates of a batched segment forward, consumed by backward.
// Batch-major layout is feature x batch so the batch axis vectorizes.
struct SegmentCache {
    int steps = 0;
    int batch = 0;
    std::vector<Matrix> h;                 // steps+1 of hs x B, h[0] = h0
    std::vector<Matrix> z, r, hcand, rh;   // steps of hs x B
    std::vector<Matrix> x;                 // steps of F x B
    void resize(const GruModel& m, int steps_, int batch_);
};

// scratch for backward; reusable across batches
struct BackwardScratch {
    Matrix dy, dh, dhprev, dz, dhc, da, drh, dr;
    void resize(const GruModel& m, int batch);
};

// one cell step, single sample; x length F, h_prev length hs
void gru_cell_forward(const GruModel& m, std::span<const double> x, std::span<const double> h_prev,
                      std::span<double> h_next, std::span<double> y);

// Batched training forward over equal-length segments. X is the split input
// matrix (n_days x F); segment b covers rows [starts[b], starts[b]+steps).
// h0 is hs x B. yhat[b] is filled as steps x V. Cache holds everything
// backward needs; cache.h[steps] is the final hidden state.
void gru_forward_train(const GruModel& m, const Matrix& X, std::span<const int> starts, int steps,
                       const Matrix& h0, std::vector<Matrix>& yhat, SegmentCache& cache);

// Inference-only forward: rolling state, no cache. h_state is hs x B, updated
// in place to the final hidden state.
void gru_forward_infer(const GruModel& m, const Matrix& X, std::span<const int> starts, int steps,
                       Matrix& h_state, std::vector<Matrix>& yhat);

// Accumulates dL/dparams into grads (does not zero). dyhat[b] is steps x V.
// No gradient flows into h0: the segment boundary truncates backprop.
void gru_backward_batch(const GruModel& m, const SegmentCache& cache,
                        const std::vector<Matrix>& dyhat, GruGrads& grads, BackwardScratch& scratch);

// single-segment convenience wrappers around the batched engine
struct SegmentForward {
    Matrix yhat;    // T x V
    Vector h_last;  // hs
    SegmentCache cache;
};
SegmentForward gru_segment_forward(const GruModel& m, const Matrix& X_seg, const Vector& h0);
GruGrads gru_segment_backward(const GruModel& m, const SegmentCache& cache, const Matrix& dyhat);

}  // namespace hydrobatch
