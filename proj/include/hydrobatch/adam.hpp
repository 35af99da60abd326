#pragma once

#include "hydrobatch/gru.hpp"

namespace hydrobatch {

// Adam in the common default setting (beta1=0.9, beta2=0.999, eps=1e-8)
// except for the 0.01 learning rate used by all experiments here.
struct AdamState {
    GruModel m1, m2;  // first/second moment accumulators, parameter-shaped
    long step_count = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(const GruModel& shape, double lr_ = 0.01);
};

// bias-corrected update: p -= lr * mhat / (sqrt(vhat) + eps)
void adam_step(GruModel& params, const GruGrads& grads, AdamState& state);

}  // namespace hydrobatch
