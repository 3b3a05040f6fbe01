#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gridlab/checkpoint.hpp"
#include "gridlab/render.hpp"
#include "gridlab/rng.hpp"
#include "gridlab/tape.hpp"

namespace gridlab {

// Resolved architecture sizes. The conv stack is three sections, each
// 3x3 conv -> 3x3/2 max pool -> two residual blocks of two 3x3 convs.
struct AgentArch {
  int in_h = 99, in_w = 99;
  std::array<int, 3> channels{64, 64, 32};
  int embed_dim = 32;
  int lang_hidden = 128;
  int mem_hidden = 128;
  int actions = kNumActions;
  int vocab_size = 0;
  bool prev_reward_input = false;
  bool classifier = false;  // two-way head instead of policy/value

  // derived by finalize()
  int conv_h = 0, conv_w = 0;
  int flat_dim = 0;
  int mem_in = 0;

  void finalize();
};

// Offsets of each tensor in AgentParams::tensors.
struct ParamLayout {
  struct Section {
    int main_w = -1, main_b = -1;
    int res_w[2][2] = {{-1, -1}, {-1, -1}};
    int res_b[2][2] = {{-1, -1}, {-1, -1}};
  };
  Section sec[3];
  int embed = -1;
  int lang_w = -1, lang_b = -1;
  int mem_w = -1, mem_b = -1;
  int policy_w = -1, policy_b = -1;
  int value_w = -1, value_b = -1;
  int classifier_w = -1, classifier_b = -1;
};

struct AgentParams {
  AgentArch arch;
  ParamLayout layout;
  std::vector<NamedTensor> tensors;

  std::int64_t param_count() const;
  std::uint64_t checksum() const;  // fnv over raw bytes, for purity checks
};

// Orthogonal recurrent blocks, scaled-uniform fan-in elsewhere, zero biases.
// The same seed yields identical upstream parameters for the agent and the
// classifier variant (heads are drawn last).
AgentParams init_agent_params(const AgentArch& arch, RngStream& rng);

void save_agent(const std::string& path, const AgentParams& params);
AgentParams load_agent(const std::string& path, const AgentArch& arch);

struct AgentState {
  Tensor h, c;  // [1, mem_hidden]
};
AgentState initial_state(const AgentArch& arch);

// [n,3,h,w] planar float in [0,1]
Tensor frames_to_tensor(const std::vector<const Frame*>& frames);
Tensor frame_to_tensor(const Frame& frame);

// ---- tape-level network builder, shared by acting, learning and checks ----

template <typename T>
struct AgentNet {
  using Id = typename TapeT<T>::Id;

  TapeT<T>* tape = nullptr;
  const AgentParams* params = nullptr;
  std::vector<Id> ids;  // tape leaf per tensor, same order

  AgentNet(TapeT<T>& tp, const AgentParams& p, bool needs_grad) : tape(&tp), params(&p) {
    ids.reserve(p.tensors.size());
    for (const auto& nt : p.tensors) {
      if constexpr (std::is_same_v<T, float>) {
        ids.push_back(tp.value(nt.t, needs_grad));
      } else {
        ids.push_back(tp.value(nt.t.template cast<T>(), needs_grad));
      }
    }
  }

  // same wiring, explicit parameter values (64-bit gradient checks)
  AgentNet(TapeT<T>& tp, const AgentParams& p,
           const std::vector<TensorT<T>>& values, bool needs_grad)
      : tape(&tp), params(&p) {
    if (values.size() != p.tensors.size())
      throw std::invalid_argument("AgentNet: value count mismatch");
    ids.reserve(values.size());
    for (const auto& v : values) ids.push_back(tp.value(v, needs_grad));
  }

  Id id_of(int layout_index) const { return ids[layout_index]; }

  // frames [n,3,h,w] -> features [n, flat_dim]
  Id conv_stack(Id frames) {
    const auto& L = params->layout;
    Id x = frames;
    for (int s = 0; s < 3; ++s) {
      x = tape->conv3x3(x, ids[L.sec[s].main_w], ids[L.sec[s].main_b]);
      x = tape->maxpool(x);
      for (int r = 0; r < 2; ++r) {
        Id y = tape->relu(x);
        y = tape->conv3x3(y, ids[L.sec[s].res_w[r][0]], ids[L.sec[s].res_b[r][0]]);
        y = tape->relu(y);
        y = tape->conv3x3(y, ids[L.sec[s].res_w[r][1]], ids[L.sec[s].res_b[r][1]]);
        x = tape->add(x, y);
      }
    }
    x = tape->relu(x);
    const auto& shape = tape->val(x).shape;
    return tape->reshape(x, {shape[0], shape[1] * shape[2] * shape[3]});
  }

  // one LSTM cell step: returns (h', c')
  std::pair<Id, Id> cell_step(Id w, Id b, Id x, Id h, Id c) {
    Id xh = tape->concat_cols({x, h});
    Id gates = tape->linear(xh, w, b);
    return tape->lstm_gate(gates, c);
  }

  // word-level LSTM over the token sequence; empty -> zero vector
  Id encode_instruction(const std::vector<int>& tokens) {
    const auto& L = params->layout;
    const int hl = params->arch.lang_hidden;
    Id h = tape->value(TensorT<T>({1, hl}), false);
    if (tokens.empty()) return h;
    Id c = tape->value(TensorT<T>({1, hl}), false);
    Id emb = tape->embedding(ids[L.embed], tokens);
    for (size_t t = 0; t < tokens.size(); ++t) {
      Id x = tape->slice_rows(emb, static_cast<std::int64_t>(t), 1);
      std::tie(h, c) = cell_step(ids[L.lang_w], ids[L.lang_b], x, h, c);
    }
    return h;
  }

  // multimodal concat -> memory LSTM step
  std::pair<Id, Id> memory_step(Id visual_row, Id lang, std::optional<T> prev_reward,
                                Id h, Id c) {
    const auto& L = params->layout;
    std::vector<Id> parts{visual_row, lang};
    if (params->arch.prev_reward_input) {
      TensorT<T> r({1, 1});
      r.data[0] = prev_reward.value_or(T(0));
      parts.push_back(tape->value(std::move(r), false));
    }
    Id input = tape->concat_cols(parts);
    return cell_step(ids[L.mem_w], ids[L.mem_b], input, h, c);
  }

  Id policy_logits(Id h_rows) {
    const auto& L = params->layout;
    return tape->linear(h_rows, ids[L.policy_w], ids[L.policy_b]);
  }
  Id values(Id h_rows) {
    const auto& L = params->layout;
    return tape->linear(h_rows, ids[L.value_w], ids[L.value_b]);
  }
  Id classifier_logits(Id h_rows) {
    const auto& L = params->layout;
    return tape->linear(h_rows, ids[L.classifier_w], ids[L.classifier_b]);
  }
};

// ---- single-step acting interface ----

struct AgentOutput {
  std::vector<float> policy;    // softmax over actions
  std::vector<float> log_policy;
  float value = 0.0f;
};

// Runs one timestep: encodes the (constant) instruction, advances the
// memory LSTM in `state`, returns the policy and value.
AgentOutput agent_step(const AgentParams& params, const Frame& frame,
                       const std::vector<int>& instruction, float prev_reward,
                       AgentState& state);

// First-frame two-way prediction (the still-image regime).
std::vector<float> classifier_forward(const AgentParams& params,
                                      const Frame& frame,
                                      const std::vector<int>& instruction);

Action act_greedy(const std::vector<float>& policy);
Action act_sample(const std::vector<float>& policy, RngStream& rng);

}  // namespace gridlab
