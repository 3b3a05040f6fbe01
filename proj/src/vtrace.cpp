#include "gridlab/vtrace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridlab {

VTraceOutput vtrace(const std::vector<double>& rewards,
                    const std::vector<double>& values, double bootstrap_value,
                    const std::vector<double>& target_log_probs,
                    const std::vector<double>& behavior_log_probs,
                    const std::vector<bool>& dones, double gamma,
                    double rho_bar, double c_bar) {
  const size_t n = rewards.size();
  if (values.size() != n || target_log_probs.size() != n ||
      behavior_log_probs.size() != n || dones.size() != n)
    throw std::invalid_argument("vtrace: input lengths differ");
  if (rho_bar < c_bar || c_bar < 0)
    throw std::invalid_argument("vtrace: need rho_bar >= c_bar >= 0");
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(rewards) || !finite(values) || !finite(target_log_probs) ||
      !finite(behavior_log_probs) || !std::isfinite(bootstrap_value))
    throw std::invalid_argument("vtrace: non-finite input");

  VTraceOutput out;
  out.vs.resize(n);
  out.pg_adv.resize(n);

  // backward recursion; vs_{t+1} and V_{t+1} fold in the bootstrap at t = n-1
  double vs_next = bootstrap_value;
  double v_next = bootstrap_value;
  for (size_t i = n; i-- > 0;) {
    const double ratio = std::exp(target_log_probs[i] - behavior_log_probs[i]);
    const double rho = std::min(rho_bar, ratio);
    const double c = std::min(c_bar, ratio);
    const double g = dones[i] ? 0.0 : gamma;
    const double delta = rho * (rewards[i] + g * v_next - values[i]);
    out.vs[i] = values[i] + delta + g * c * (vs_next - v_next);
    out.pg_adv[i] = rho * (rewards[i] + g * vs_next - values[i]);
    vs_next = out.vs[i];
    v_next = values[i];
  }
  return out;
}

}  // namespace gridlab
