#include "hydrobatch/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hydrobatch {

double segment_mse(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg, const Vector& h0) {
    require(X_seg.rows == Y_seg.rows && Y_seg.cols == m.output_size,
            "segment_mse: target shape mismatch");
    SegmentForward fwd = gru_segment_forward(m, X_seg, h0);
    double sse = 0.0;
    for (size_t i = 0; i < fwd.yhat.data.size(); ++i) {
        const double d = fwd.yhat.data[i] - Y_seg.data[i];
        sse += d * d;
    }
    return sse / static_cast<double>(fwd.yhat.data.size());
}

GruGrads segment_mse_grads(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg,
                           const Vector& h0) {
    SegmentForward fwd = gru_segment_forward(m, X_seg, h0);
    Matrix dyhat(Y_seg.rows, Y_seg.cols);
    const double scale = 2.0 / static_cast<double>(Y_seg.data.size());
    for (size_t i = 0; i < dyhat.data.size(); ++i)
        dyhat.data[i] = scale * (fwd.yhat.data[i] - Y_seg.data[i]);
    return gru_segment_backward(m, fwd.cache, dyhat);
}

double gradcheck_against(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg,
                         const Vector& h0, const GruGrads& analytic, double fd_step) {
    GruModel probe = m;
    auto spans = probe.param_spans();
    auto aspans = analytic.param_spans();
    double worst = 0.0;
    for (size_t blk = 0; blk < spans.size(); ++blk) {
        for (size_t i = 0; i < spans[blk].size(); ++i) {
            const double orig = spans[blk][i];
            spans[blk][i] = orig + fd_step;
            const double lp = segment_mse(probe, X_seg, Y_seg, h0);
            spans[blk][i] = orig - fd_step;
            const double lm = segment_mse(probe, X_seg, Y_seg, h0);
            spans[blk][i] = orig;
            const double numeric = (lp - lm) / (2.0 * fd_step);
            const double a = aspans[blk][i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

double gradcheck(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg, const Vector& h0,
                 double fd_step) {
    return gradcheck_against(m, X_seg, Y_seg, h0, segment_mse_grads(m, X_seg, Y_seg, h0), fd_step);
}

}  // namespace hydrobatch
