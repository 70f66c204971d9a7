#pragma once

#include <cstddef>
#include <vector>

#include "ske/autodiff.hpp"

namespace ske {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  double warmup_proportion = 0.1;
};

// Schedule multiplier for 1-based step t out of total_steps: linear ramp
// from 0 over the first warmup_proportion * total_steps steps (scale 1.0
// exactly at the boundary), then linear decay to 0 at total_steps.
double warmup_linear_scale(std::size_t step, std::size_t total_steps, double warmup_proportion);

// Decoupled weight decay Adam over a fixed parameter list, with the
// warmup/linear-decay schedule baked in. step() consumes the gradients
// currently stored in the parameters.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, AdamWConfig config, std::size_t total_steps);

  // Throws NumericError on a nonfinite gradient.
  void step();

  std::size_t step_count() const { return step_; }
  double last_scale() const { return last_scale_; }
  const AdamWConfig& config() const { return config_; }

 private:
  std::vector<Parameter*> params_;
  AdamWConfig config_;
  std::size_t total_steps_;
  std::size_t step_ = 0;
  double last_scale_ = 0.0;
  std::vector<Tensor> moment1_;
  std::vector<Tensor> moment2_;
};

}  // namespace ske
