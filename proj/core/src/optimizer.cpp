#include "ske/optimizer.hpp"

#include <cmath>

#include "ske/common.hpp"

namespace ske {

double warmup_linear_scale(std::size_t step, std::size_t total_steps, double warmup_proportion) {
  if (total_steps == 0) return 0.0;
  const double t = static_cast<double>(step);
  const double total = static_cast<double>(total_steps);
  const double warmup = warmup_proportion * total;
  if (warmup > 0.0 && t < warmup) return t / warmup;
  if (t >= total) return 0.0;
  return (total - t) / (total - warmup);
}

AdamW::AdamW(std::vector<Parameter*> params, AdamWConfig config, std::size_t total_steps)
    : params_(std::move(params)), config_(config), total_steps_(total_steps) {
  moment1_.reserve(params_.size());
  moment2_.reserve(params_.size());
  for (const Parameter* p : params_) {
    moment1_.emplace_back(p->value.shape());
    moment2_.emplace_back(p->value.shape());
  }
}

void AdamW::step() {
  ++step_;
  last_scale_ = warmup_linear_scale(step_, total_steps_, config_.warmup_proportion);
  const double lr = config_.lr * last_scale_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));

  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    auto values = p.value.data();
    auto grads = p.grad.data();
    auto m1 = moment1_[k].data();
    auto m2 = moment2_[k].data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      if (!std::isfinite(g)) {
        throw NumericError("nonfinite gradient in " + p.name + " at step " +
                           std::to_string(step_));
      }
      m1[i] = config_.beta1 * m1[i] + (1.0 - config_.beta1) * g;
      m2[i] = config_.beta2 * m2[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m1[i] / bias1;
      const double v_hat = m2[i] / bias2;
      values[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.epsilon) +
                         config_.weight_decay * values[i]);
    }
  }
}

}  // namespace ske
