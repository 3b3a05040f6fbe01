#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "gridlab/rng.hpp"
#include "gridlab/vtrace.hpp"

using namespace gridlab;

namespace {

// independent oracle: the definition as an explicit sum,
//   vs_t = V_t + sum_{k>=t} gamma^{k-t} (prod_{i in [t,k)} c_i) delta_k
VTraceOutput vtrace_bruteforce(const std::vector<double>& rewards,
                               const std::vector<double>& values,
                               double bootstrap,
                               const std::vector<double>& target_lp,
                               const std::vector<double>& behavior_lp,
                               const std::vector<bool>& dones, double gamma,
                               double rho_bar, double c_bar) {
  const int n = static_cast<int>(rewards.size());
  std::vector<double> rho(n), c(n), g(n), vnext(n), delta(n);
  for (int t = 0; t < n; ++t) {
    const double ratio = std::exp(target_lp[t] - behavior_lp[t]);
    rho[t] = std::min(rho_bar, ratio);
    c[t] = std::min(c_bar, ratio);
    g[t] = dones[t] ? 0.0 : gamma;
    vnext[t] = t + 1 < n ? values[t + 1] : bootstrap;
    delta[t] = rho[t] * (rewards[t] + g[t] * vnext[t] - values[t]);
  }
  VTraceOutput out;
  out.vs.resize(n);
  out.pg_adv.resize(n);
  for (int t = 0; t < n; ++t) {
    double acc = values[t];
    for (int k = t; k < n; ++k) {
      double coeff = 1.0;
      for (int i = t; i < k; ++i) coeff *= g[i] * c[i];
      acc += coeff * delta[k];
    }
    out.vs[t] = acc;
  }
  for (int t = 0; t < n; ++t) {
    const double vs_next = t + 1 < n ? out.vs[t + 1] : bootstrap;
    out.pg_adv[t] = rho[t] * (rewards[t] + g[t] * vs_next - values[t]);
  }
  return out;
}

}  // namespace

TEST_CASE("vtrace: on-policy targets reduce to n-step returns") {
  RngStream rng = derive_stream(400, 1);
  const int n = 20;
  std::vector<double> rewards(n), values(n), lp(n);
  std::vector<bool> dones(n, false);
  for (int t = 0; t < n; ++t) {
    rewards[t] = rng.next_double();
    values[t] = rng.next_gaussian();
    lp[t] = -std::abs(rng.next_gaussian());
  }
  const double bootstrap = 0.3;
  const double gamma = 0.99;
  const auto out = vtrace(rewards, values, bootstrap, lp, lp, dones, gamma, 1.0, 1.0);
  for (int t = 0; t < n; ++t) {
    double ret = 0, g = 1;
    for (int k = t; k < n; ++k) {
      ret += g * rewards[k];
      g *= gamma;
    }
    ret += g * bootstrap;
    CHECK(std::abs(out.vs[t] - ret) < 1e-6);
  }
}

TEST_CASE("vtrace: single-step hand example") {
  // r=1, V(s)=0.5, V(s')=0 (bootstrap), gamma=1, on-policy
  const auto out = vtrace({1.0}, {0.5}, 0.0, {-0.5}, {-0.5}, {false}, 1.0, 1.0, 1.0);
  CHECK(out.vs[0] == doctest::Approx(1.0));
  CHECK(out.pg_adv[0] == doctest::Approx(0.5));
}

TEST_CASE("vtrace: heavily off-policy behaviour clips the update away") {
  // behavior log-prob much larger than target: rho -> 0, vs -> V
  const auto out =
      vtrace({1.0, 0.5}, {0.2, 0.4}, 0.1, {-20.0, -20.0}, {-0.01, -0.01},
             {false, false}, 0.99, 1.0, 1.0);
  CHECK(std::abs(out.vs[0] - 0.2) < 1e-6);
  CHECK(std::abs(out.vs[1] - 0.4) < 1e-6);
  CHECK(std::abs(out.pg_adv[0]) < 1e-6);
}

TEST_CASE("vtrace: matches the brute-force expansion off-policy") {
  RngStream rng = derive_stream(400, 2);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_below(12));
    std::vector<double> rewards(n), values(n), tlp(n), blp(n);
    std::vector<bool> dones(n, false);
    for (int t = 0; t < n; ++t) {
      rewards[t] = rng.next_gaussian();
      values[t] = rng.next_gaussian();
      tlp[t] = -std::abs(rng.next_gaussian());
      blp[t] = -std::abs(rng.next_gaussian());
    }
    if (rng.next_bool()) dones[n - 1] = true;
    const double bootstrap = rng.next_gaussian();
    const double gamma = 0.95;
    const double rho_bar = 1.0 + rng.next_double();
    const double c_bar = rho_bar * rng.next_double();
    const auto fast = vtrace(rewards, values, bootstrap, tlp, blp, dones,
                             gamma, rho_bar, c_bar);
    const auto slow = vtrace_bruteforce(rewards, values, bootstrap, tlp, blp,
                                        dones, gamma, rho_bar, c_bar);
    for (int t = 0; t < n; ++t) {
      CHECK(fast.vs[t] == doctest::Approx(slow.vs[t]).epsilon(1e-9));
      CHECK(fast.pg_adv[t] == doctest::Approx(slow.pg_adv[t]).epsilon(1e-9));
    }
  }
}

TEST_CASE("vtrace: terminal steps mask the discount") {
  // done at t=0: vs_0 must ignore the bootstrap entirely
  const auto out = vtrace({1.0}, {0.4}, 99.0, {-0.7}, {-0.7}, {true}, 0.99, 1.0, 1.0);
  CHECK(out.vs[0] == doctest::Approx(1.0));
  CHECK(out.pg_adv[0] == doctest::Approx(1.0 - 0.4));
}

TEST_CASE("vtrace: rejects malformed inputs") {
  CHECK_THROWS_AS(vtrace({1.0}, {0.5, 0.2}, 0.0, {-0.5}, {-0.5}, {false}, 1.0,
                         1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(vtrace({1.0}, {0.5}, 0.0, {-0.5}, {-0.5}, {false}, 1.0, 0.5,
                         1.0),
                  std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(
      vtrace({inf}, {0.5}, 0.0, {-0.5}, {-0.5}, {false}, 1.0, 1.0, 1.0),
      std::invalid_argument);
}
