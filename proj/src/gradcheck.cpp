#include "gridlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridlab {

double grad_check(
    const std::function<double(const std::vector<TensorT<double>>&)>& loss_fn,
    std::vector<TensorT<double>> params,
    const std::vector<TensorT<double>>& analytic, int min_samples, double eps,
    RngStream& rng) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("grad_check: analytic gradient count mismatch");

  std::int64_t total = 0;
  for (const auto& p : params) total += p.numel();
  if (total == 0) return 0.0;

  // (tensor, coord) pairs to probe
  std::vector<std::pair<size_t, std::int64_t>> coords;
  if (total <= min_samples) {
    for (size_t t = 0; t < params.size(); ++t)
      for (std::int64_t i = 0; i < params[t].numel(); ++i) coords.push_back({t, i});
  } else {
    for (int s = 0; s < min_samples; ++s) {
      std::int64_t flat = static_cast<std::int64_t>(
          rng.next_u64() % static_cast<std::uint64_t>(total));
      for (size_t t = 0; t < params.size(); ++t) {
        if (flat < params[t].numel()) {
          coords.push_back({t, flat});
          break;
        }
        flat -= params[t].numel();
      }
    }
  }

  double max_rel = 0.0;
  for (const auto& [t, i] : coords) {
    const double saved = params[t].data[i];
    params[t].data[i] = saved + eps;
    const double up = loss_fn(params);
    params[t].data[i] = saved - eps;
    const double down = loss_fn(params);
    params[t].data[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("grad_check: non-finite loss");
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[t].data[i];
    if (!std::isfinite(a))
      throw std::runtime_error("grad_check: non-finite analytic gradient");
    const double rel =
        std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace gridlab
