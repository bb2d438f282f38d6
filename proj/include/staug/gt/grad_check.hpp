#pragma once

#include "staug/gt/model.hpp"

#include <functional>

namespace staug::gt {

struct GradCheckOptions {
    double epsilon = 1e-5;
    int min_coordinates = 200;
    std::uint64_t seed = 1;
    // Applied to the analytic gradients before comparison (negative controls).
    std::function<void(std::vector<Parameter>&)> corrupt;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    int coordinates = 0;
    int tensors = 0;
    std::string worst; // "tensor[index]" of the largest error
};

// Relative error |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric);

// Central finite differences on a random subsample of coordinates covering
// every tensor. `loss` evaluates the scalar objective; `backward` must fill
// Parameter::grad (after zeroing) for the current parameter values.
GradCheckResult grad_check_params(std::vector<Parameter>& params, const std::function<double()>& loss,
                                  const std::function<void()>& backward, const GradCheckOptions& opts = {});

// Masked-loss gradient check of the whole model in eval mode.
GradCheckResult grad_check(GtModel& model, const GraphBatch& batch, const Mat& target, const MaskMat& observed,
                           const Eigen::VectorXd& task_weight, const GradCheckOptions& opts = {});

} // namespace staug::gt
