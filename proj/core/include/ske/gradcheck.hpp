#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ske/autodiff.hpp"
#include "ske/common.hpp"

namespace ske {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Coordinates sampled per parameter tensor; 0 means all of them.
  std::size_t max_coords_per_param = 0;
  std::uint64_t sample_seed = 1;
  // Relative-error denominator floor; gradients far below the loss scale
  // are compared absolutely against this.
  double denom_floor = 1e-3;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central-difference check of d(loss)/d(param) for every listed parameter.
// `loss` must rebuild its graph from the parameters' current values on
// each call and, when the flag is set, accumulate gradients into them.
// Detects nondeterminism (two plain forward passes disagreeing) and
// reports the max relative error over the sampled coordinates.
GradCheckReport grad_check(const std::function<double(bool accumulate_grads)>& loss,
                           const std::vector<Parameter*>& params,
                           const GradCheckOptions& options = {});

}  // namespace ske
