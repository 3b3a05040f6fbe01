#pragma once

#include <vector>

namespace gridlab {

struct VTraceOutput {
  std::vector<double> vs;      // value targets, one per step
  std::vector<double> pg_adv;  // policy-gradient advantages, one per step
};

// Off-policy value/advantage targets with clipped importance ratios.
//   rho_t = min(rho_bar, exp(target_lp - behavior_lp))
//   c_t   = min(c_bar,   exp(target_lp - behavior_lp))
//   delta_t = rho_t (r_t + gamma_t V_{t+1} - V_t)
//   vs_t  = V_t + delta_t + gamma_t c_t (vs_{t+1} - V_{t+1})
//   adv_t = rho_t (r_t + gamma_t vs_{t+1} - V_t)
// where gamma_t is gamma masked to 0 at a terminal step and V_{T} is
// bootstrap_value. Throws std::invalid_argument on non-finite inputs or
// mismatched lengths.
VTraceOutput vtrace(const std::vector<double>& rewards,
                    const std::vector<double>& values, double bootstrap_value,
                    const std::vector<double>& target_log_probs,
                    const std::vector<double>& behavior_log_probs,
                    const std::vector<bool>& dones, double gamma,
                    double rho_bar, double c_bar);

}  // namespace gridlab
