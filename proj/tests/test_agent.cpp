#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "gridlab/agent.hpp"
#include "gridlab/language.hpp"
#include "gridlab/tasks.hpp"

using namespace gridlab;

namespace {

AgentArch small_arch(bool classifier = false, bool prev_reward = false) {
  AgentArch arch;
  arch.in_h = arch.in_w = 15;
  arch.channels = {4, 4, 2};
  arch.embed_dim = 4;
  arch.lang_hidden = 6;
  arch.mem_hidden = 8;
  arch.actions = 4;
  arch.vocab_size = 9;
  arch.prev_reward_input = prev_reward;
  arch.classifier = classifier;
  arch.finalize();
  return arch;
}

Frame gray_frame(int side, std::uint8_t level = 96) {
  Frame f;
  f.width = f.height = side;
  f.data.assign(static_cast<size_t>(side) * side * 3, level);
  return f;
}

}  // namespace

TEST_CASE("agent: policy is a distribution over exactly four actions") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(300, 1);
  const AgentParams params = init_agent_params(arch, rng);
  AgentState st = initial_state(arch);
  const AgentOutput out =
      agent_step(params, gray_frame(15), {1, 2, 3}, 0.0f, st);
  REQUIRE(out.policy.size() == 4);
  double sum = 0;
  for (float p : out.policy) {
    CHECK(p >= 0.0f);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::isfinite(out.value));
}

TEST_CASE("agent: zero parameters give the uniform policy and zero value") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(300, 2);
  AgentParams params = init_agent_params(arch, rng);
  for (auto& nt : params.tensors)
    std::fill(nt.t.data.begin(), nt.t.data.end(), 0.0f);
  AgentState st = initial_state(arch);
  const AgentOutput out = agent_step(params, gray_frame(15), {1, 2}, 0.0f, st);
  for (float p : out.policy) CHECK(p == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(out.value == 0.0f);
}

TEST_CASE("agent: frame size mismatch names both shapes") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(300, 3);
  const AgentParams params = init_agent_params(arch, rng);
  AgentState st = initial_state(arch);
  CHECK_THROWS_WITH_AS(agent_step(params, gray_frame(17), {1}, 0.0f, st),
                       doctest::Contains("17x17"), std::invalid_argument);
}

TEST_CASE("agent: memory carries information across steps and resets clean") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(300, 4);
  const AgentParams params = init_agent_params(arch, rng);

  Frame bright = gray_frame(15, 200);
  Frame dark = gray_frame(15, 20);
  Frame probe = gray_frame(15, 96);
  const std::vector<int> instr = {1, 2};

  // same probe frame, different first observations: the policy at the
  // second step must generally differ
  AgentState s1 = initial_state(arch);
  agent_step(params, bright, instr, 0.0f, s1);
  const AgentOutput after_bright = agent_step(params, probe, instr, 0.0f, s1);

  AgentState s2 = initial_state(arch);
  agent_step(params, dark, instr, 0.0f, s2);
  const AgentOutput after_dark = agent_step(params, probe, instr, 0.0f, s2);

  double diff = 0;
  for (int a = 0; a < 4; ++a)
    diff += std::abs(after_bright.policy[a] - after_dark.policy[a]);
  CHECK(diff > 1e-6);

  // resetting the state restores the exact initial outputs
  AgentState s3 = initial_state(arch);
  const AgentOutput first = agent_step(params, bright, instr, 0.0f, s3);
  AgentState s4 = initial_state(arch);
  const AgentOutput again = agent_step(params, bright, instr, 0.0f, s4);
  CHECK(first.policy == again.policy);
  CHECK(first.value == again.value);
}

TEST_CASE("agent: prev-reward input changes the policy only when enabled") {
  RngStream rng_a = derive_stream(300, 5);
  const AgentParams with = init_agent_params(small_arch(false, true), rng_a);
  AgentState s1 = initial_state(with.arch);
  AgentState s2 = initial_state(with.arch);
  const auto r0 = agent_step(with, gray_frame(15), {1}, 0.0f, s1);
  const auto r1 = agent_step(with, gray_frame(15), {1}, 1.0f, s2);
  double diff = 0;
  for (int a = 0; a < 4; ++a) diff += std::abs(r0.policy[a] - r1.policy[a]);
  CHECK(diff > 1e-7);

  RngStream rng_b = derive_stream(300, 5);
  const AgentParams without = init_agent_params(small_arch(false, false), rng_b);
  AgentState s3 = initial_state(without.arch);
  AgentState s4 = initial_state(without.arch);
  const auto q0 = agent_step(without, gray_frame(15), {1}, 0.0f, s3);
  const auto q1 = agent_step(without, gray_frame(15), {1}, 1.0f, s4);
  CHECK(q0.policy == q1.policy);
}

TEST_CASE("classifier: zero parameters split 50/50; heads share upstream") {
  const AgentArch carch = small_arch(true);
  RngStream rng = derive_stream(301, 1);
  AgentParams cparams = init_agent_params(carch, rng);

  AgentParams zeroed = cparams;
  for (auto& nt : zeroed.tensors)
    std::fill(nt.t.data.begin(), nt.t.data.end(), 0.0f);
  const auto probs = classifier_forward(zeroed, gray_frame(15), {1, 2});
  REQUIRE(probs.size() == 2);
  CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-6));

  // same seed, agent heads instead: upstream tensors must be identical
  RngStream rng2 = derive_stream(301, 1);
  const AgentParams aparams = init_agent_params(small_arch(false), rng2);
  for (size_t i = 0; i < cparams.tensors.size(); ++i) {
    const auto& name = cparams.tensors[i].name;
    if (name.rfind("head.", 0) == 0) continue;
    CHECK(aparams.tensors[i].name == name);
    CHECK(aparams.tensors[i].t.data == cparams.tensors[i].t.data);
  }
}

TEST_CASE("act: greedy picks the mode, sampling tracks probabilities") {
  const std::vector<float> policy = {0.1f, 0.7f, 0.1f, 0.1f};
  CHECK(act_greedy(policy) == Action::down);  // index 1

  RngStream rng = derive_stream(302, 1);
  std::array<int, 4> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    counts[static_cast<int>(act_sample(policy, rng))]++;
  for (int a = 0; a < 4; ++a)
    CHECK(std::abs(double(counts[a]) / n - policy[a]) < 0.01);

  RngStream r1 = derive_stream(302, 2);
  RngStream r2 = derive_stream(302, 2);
  for (int i = 0; i < 100; ++i)
    CHECK(act_sample(policy, r1) == act_sample(policy, r2));
}

TEST_CASE("agent: instruction encoding is deterministic across calls") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(303, 1);
  const AgentParams params = init_agent_params(arch, rng);
  AgentState s1 = initial_state(arch);
  AgentState s2 = initial_state(arch);
  const auto a = agent_step(params, gray_frame(15), {1, 2, 3, 4}, 0.0f, s1);
  const auto b = agent_step(params, gray_frame(15), {1, 2, 3, 4}, 0.0f, s2);
  CHECK(a.policy == b.policy);
  CHECK(s1.h.data == s2.h.data);
}

TEST_CASE("agent: parameter count follows the architecture") {
  const AgentArch arch = small_arch();
  RngStream rng = derive_stream(304, 1);
  const AgentParams params = init_agent_params(arch, rng);
  std::int64_t expect = 0;
  // conv stack
  int cin = 3;
  for (int s = 0; s < 3; ++s) {
    const int cout = arch.channels[s];
    expect += std::int64_t(cout) * cin * 9 + cout;
    expect += 4 * (std::int64_t(cout) * cout * 9 + cout);
    cin = cout;
  }
  expect += std::int64_t(arch.vocab_size) * arch.embed_dim;
  expect += std::int64_t(4 * arch.lang_hidden) *
                (arch.embed_dim + arch.lang_hidden) + 4 * arch.lang_hidden;
  expect += std::int64_t(4 * arch.mem_hidden) *
                (arch.mem_in + arch.mem_hidden) + 4 * arch.mem_hidden;
  expect += std::int64_t(arch.actions) * arch.mem_hidden + arch.actions;
  expect += arch.mem_hidden + 1;
  CHECK(params.param_count() == expect);
}
