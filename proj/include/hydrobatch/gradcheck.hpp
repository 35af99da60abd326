#pragma once

#include "hydrobatch/gru.hpp"

namespace hydrobatch {

// mean over all T x V entries of (yhat - y)^2 for one segment from h0
double segment_mse(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg, const Vector& h0);

// analytic gradient of segment_mse w.r.t. every parameter
GruGrads segment_mse_grads(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg,
                           const Vector& h0);

// max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
// numeric by central differences with the given step
double gradcheck_against(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg,
                         const Vector& h0, const GruGrads& analytic, double fd_step = 1e-5);

// finite-difference oracle for the analytic backward pass
double gradcheck(const GruModel& m, const Matrix& X_seg, const Matrix& Y_seg, const Vector& h0,
                 double fd_step = 1e-5);

}  // namespace hydrobatch
