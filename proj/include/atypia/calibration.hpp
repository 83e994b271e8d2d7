#pragma once

#include <span>

namespace atypia {

// Sigmoid calibration p = 1 / (1 + exp(slope * score + intercept)).
// After fitting on data where larger scores indicate the positive class the
// slope is negative, so the calibrated probability increases with the score.
struct PlattParams {
    double slope = -1.0;   // A
    double intercept = 0.0;  // B
};

// Platt's procedure: minimize the regularized negative log-likelihood with the
// smoothed targets t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2). Newton iterations
// with backtracking, at most 100 steps, gradient tolerance 1e-10.
// Throws SingleClassSample unless both label values are present.
PlattParams fit_platt(std::span<const double> scores, std::span<const int> labels);

// Calibrated probability, strictly inside (0, 1) for finite scores.
double apply_platt(const PlattParams& params, double score);

}  // namespace atypia
