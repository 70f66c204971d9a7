#include "ske/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ske {

GradCheckReport grad_check(const std::function<double(bool)>& loss,
                           const std::vector<Parameter*>& params,
                           const GradCheckOptions& options) {
  const double base = loss(false);
  if (loss(false) != base) {
    throw NumericError("grad_check: loss function is nondeterministic");
  }
  if (!std::isfinite(base)) throw NumericError("grad_check: nonfinite loss");

  for (Parameter* p : params) p->zero_grad();
  loss(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  Rng sampler(options.sample_seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    std::vector<std::size_t> coords(p.value.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      sampler.shuffle(coords);
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t i : coords) {
      const double saved = p.value[i];
      p.value[i] = saved + options.epsilon;
      const double up = loss(false);
      p.value[i] = saved - options.epsilon;
      const double down = loss(false);
      p.value[i] = saved;

      const double numeric = (up - down) / (2.0 * options.epsilon);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denom_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace ske
