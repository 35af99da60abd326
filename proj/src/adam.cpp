#include "hydrobatch/adam.hpp"

#include <cmath>

namespace hydrobatch {

AdamState::AdamState(const GruModel& shape, double lr_)
    : m1(shape.input_size, shape.hidden_size, shape.output_size),
      m2(shape.input_size, shape.hidden_size, shape.output_size),
      lr(lr_) {}

void adam_step(GruModel& params, const GruGrads& grads, AdamState& state) {
    require(params.input_size == grads.input_size && params.hidden_size == grads.hidden_size &&
                params.output_size == grads.output_size,
            "adam_step: gradient shape mismatch");
    require(params.input_size == state.m1.input_size &&
                params.hidden_size == state.m1.hidden_size &&
                params.output_size == state.m1.output_size,
            "adam_step: state shape mismatch");

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

    auto p = params.param_spans();
    auto g = grads.param_spans();
    auto m = state.m1.param_spans();
    auto v = state.m2.param_spans();
    for (size_t blk = 0; blk < p.size(); ++blk) {
        require(p[blk].size() == g[blk].size(), "adam_step: block size mismatch");
        for (size_t i = 0; i < p[blk].size(); ++i) {
            const double gi = g[blk][i];
            m[blk][i] = state.beta1 * m[blk][i] + (1.0 - state.beta1) * gi;
            v[blk][i] = state.beta2 * v[blk][i] + (1.0 - state.beta2) * gi * gi;
            const double mhat = m[blk][i] / bc1;
            const double vhat = v[blk][i] / bc2;
            p[blk][i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace hydrobatch
