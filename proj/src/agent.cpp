#include "gridlab/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace gridlab {
namespace {

AgentParams param_skeleton(const AgentArch& arch) {
  AgentParams p;
  p.arch = arch;
  auto add = [&p](const std::string& name, std::vector<std::int64_t> shape) {
    p.tensors.push_back({name, Tensor(std::move(shape))});
    return static_cast<int>(p.tensors.size() - 1);
  };

  int cin = 3;
  for (int s = 0; s < 3; ++s) {
    const int cout = arch.channels[static_cast<size_t>(s)];
    const std::string base = "conv.s" + std::to_string(s);
    p.layout.sec[s].main_w = add(base + ".main.w", {cout, cin, 3, 3});
    p.layout.sec[s].main_b = add(base + ".main.b", {cout});
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const std::string rb =
            base + ".res" + std::to_string(r) + ".c" + std::to_string(c);
        p.layout.sec[s].res_w[r][c] = add(rb + ".w", {cout, cout, 3, 3});
        p.layout.sec[s].res_b[r][c] = add(rb + ".b", {cout});
      }
    }
    cin = cout;
  }
  p.layout.embed = add("lang.embed", {arch.vocab_size, arch.embed_dim});
  p.layout.lang_w = add("lang.lstm.w", {4 * arch.lang_hidden,
                                        arch.embed_dim + arch.lang_hidden});
  p.layout.lang_b = add("lang.lstm.b", {4 * arch.lang_hidden});
  p.layout.mem_w =
      add("mem.lstm.w", {4 * arch.mem_hidden, arch.mem_in + arch.mem_hidden});
  p.layout.mem_b = add("mem.lstm.b", {4 * arch.mem_hidden});
  if (arch.classifier) {
    p.layout.classifier_w = add("head.classifier.w", {2, arch.mem_hidden});
    p.layout.classifier_b = add("head.classifier.b", {2});
  } else {
    p.layout.policy_w = add("head.policy.w", {arch.actions, arch.mem_hidden});
    p.layout.policy_b = add("head.policy.b", {arch.actions});
    p.layout.value_w = add("head.value.w", {1, arch.mem_hidden});
    p.layout.value_b = add("head.value.b", {1});
  }
  return p;
}

void fill_uniform(Tensor& t, double limit, RngStream& rng) {
  for (auto& v : t.data)
    v = static_cast<float>((rng.next_double() * 2.0 - 1.0) * limit);
}

// rows of an n x n block become orthonormal (modified Gram-Schmidt)
std::vector<double> orthogonal_block(int n, RngStream& rng) {
  std::vector<double> m(static_cast<size_t>(n) * n);
  for (auto& v : m) v = rng.next_gaussian();
  for (int r = 0; r < n; ++r) {
    for (int p = 0; p < r; ++p) {
      double dot = 0;
      for (int k = 0; k < n; ++k) dot += m[r * n + k] * m[p * n + k];
      for (int k = 0; k < n; ++k) m[r * n + k] -= dot * m[p * n + k];
    }
    double norm = 0;
    for (int k = 0; k < n; ++k) norm += m[r * n + k] * m[r * n + k];
    norm = std::sqrt(norm);
    if (norm < 1e-8) {
      for (int k = 0; k < n; ++k) m[r * n + k] = rng.next_gaussian();
      --r;
      continue;
    }
    for (int k = 0; k < n; ++k) m[r * n + k] /= norm;
  }
  return m;
}

// LSTM weight [4h, in+h]: scaled-uniform input block, orthogonal recurrent
// block per gate
void init_lstm_weight(Tensor& w, int hidden, int input, RngStream& rng) {
  const double limit = std::sqrt(3.0 / (input + hidden));
  const std::int64_t cols = input + hidden;
  for (std::int64_t r = 0; r < 4 * hidden; ++r)
    for (std::int64_t c = 0; c < input; ++c)
      w.data[r * cols + c] =
          static_cast<float>((rng.next_double() * 2.0 - 1.0) * limit);
  for (int gate = 0; gate < 4; ++gate) {
    const auto block = orthogonal_block(hidden, rng);
    for (int r = 0; r < hidden; ++r)
      for (int c = 0; c < hidden; ++c)
        w.data[(gate * hidden + r) * cols + input + c] =
            static_cast<float>(block[static_cast<size_t>(r) * hidden + c]);
  }
}

}  // namespace

void AgentArch::finalize() {
  int h = in_h, w = in_w;
  for (int s = 0; s < 3; ++s) {
    h = nn::pooled_dim(h);
    w = nn::pooled_dim(w);
  }
  conv_h = h;
  conv_w = w;
  flat_dim = channels[2] * h * w;
  mem_in = flat_dim + lang_hidden + (prev_reward_input ? 1 : 0);
}

std::int64_t AgentParams::param_count() const {
  std::int64_t n = 0;
  for (const auto& nt : tensors) n += nt.t.numel();
  return n;
}

std::uint64_t AgentParams::checksum() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& nt : tensors) {
    mix(nt.name.data(), nt.name.size());
    mix(nt.t.data.data(), nt.t.data.size() * sizeof(float));
  }
  return h;
}

AgentParams init_agent_params(const AgentArch& arch, RngStream& rng) {
  if (arch.flat_dim == 0)
    throw std::logic_error("init_agent_params: arch not finalized");
  AgentParams p = param_skeleton(arch);
  auto& L = p.layout;

  int cin = 3;
  for (int s = 0; s < 3; ++s) {
    const int cout = arch.channels[static_cast<size_t>(s)];
    fill_uniform(p.tensors[L.sec[s].main_w].t, std::sqrt(6.0 / (cin * 9)), rng);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        fill_uniform(p.tensors[L.sec[s].res_w[r][c]].t,
                     std::sqrt(6.0 / (cout * 9)), rng);
    cin = cout;
  }
  fill_uniform(p.tensors[L.embed].t, std::sqrt(3.0 / arch.embed_dim), rng);
  init_lstm_weight(p.tensors[L.lang_w].t, arch.lang_hidden, arch.embed_dim, rng);
  init_lstm_weight(p.tensors[L.mem_w].t, arch.mem_hidden, arch.mem_in, rng);
  // small head weights keep the initial policy near uniform
  if (arch.classifier) {
    fill_uniform(p.tensors[L.classifier_w].t,
                 0.1 * std::sqrt(3.0 / arch.mem_hidden), rng);
  } else {
    fill_uniform(p.tensors[L.policy_w].t, 0.1 * std::sqrt(3.0 / arch.mem_hidden),
                 rng);
    fill_uniform(p.tensors[L.value_w].t, 0.1 * std::sqrt(3.0 / arch.mem_hidden),
                 rng);
  }
  return p;
}

void save_agent(const std::string& path, const AgentParams& params) {
  save_checkpoint(path, params.tensors);
}

AgentParams load_agent(const std::string& path, const AgentArch& arch) {
  AgentParams p = param_skeleton(arch);
  auto loaded = load_checkpoint(path);
  if (loaded.size() != p.tensors.size())
    throw std::runtime_error("load_agent: tensor count mismatch");
  for (size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].name != p.tensors[i].name)
      throw std::runtime_error("load_agent: tensor name mismatch: " +
                               loaded[i].name + " vs " + p.tensors[i].name);
    if (loaded[i].t.shape != p.tensors[i].t.shape)
      throw std::runtime_error("load_agent: shape mismatch for " +
                               loaded[i].name);
    p.tensors[i].t = std::move(loaded[i].t);
  }
  return p;
}

AgentState initial_state(const AgentArch& arch) {
  return AgentState{Tensor({1, arch.mem_hidden}), Tensor({1, arch.mem_hidden})};
}

Tensor frames_to_tensor(const std::vector<const Frame*>& frames) {
  if (frames.empty()) throw std::invalid_argument("frames_to_tensor: empty");
  const int h = frames[0]->height, w = frames[0]->width;
  Tensor t({static_cast<std::int64_t>(frames.size()), 3, h, w});
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (size_t n = 0; n < frames.size(); ++n) {
    const Frame& f = *frames[n];
    if (f.height != h || f.width != w)
      throw std::invalid_argument("frames_to_tensor: mixed frame sizes");
    float* base = t.ptr() + static_cast<std::int64_t>(n) * 3 * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      base[i] = f.data[i * 3] / 255.0f;
      base[plane + i] = f.data[i * 3 + 1] / 255.0f;
      base[2 * plane + i] = f.data[i * 3 + 2] / 255.0f;
    }
  }
  return t;
}

Tensor frame_to_tensor(const Frame& frame) { return frames_to_tensor({&frame}); }

AgentOutput agent_step(const AgentParams& params, const Frame& frame,
                       const std::vector<int>& instruction, float prev_reward,
                       AgentState& state) {
  const AgentArch& arch = params.arch;
  if (arch.classifier)
    throw std::logic_error("agent_step: classifier params have no policy head");
  if (frame.width != arch.in_w || frame.height != arch.in_h)
    throw std::invalid_argument(
        "agent_step: frame " + std::to_string(frame.width) + "x" +
        std::to_string(frame.height) + " does not match network input " +
        std::to_string(arch.in_w) + "x" + std::to_string(arch.in_h));

  Tape tape;
  AgentNet<float> net(tape, params, /*needs_grad=*/false);
  const auto fid = tape.value(frame_to_tensor(frame));
  const auto visual = net.conv_stack(fid);
  const auto lang = net.encode_instruction(instruction);
  const auto h0 = tape.value(state.h);
  const auto c0 = tape.value(state.c);
  const auto [h, c] = net.memory_step(visual, lang, prev_reward, h0, c0);
  const auto logp = tape.log_softmax(net.policy_logits(h));
  const auto vhead = net.values(h);

  AgentOutput out;
  out.log_policy.assign(tape.val(logp).data.begin(), tape.val(logp).data.end());
  out.policy.resize(out.log_policy.size());
  for (size_t i = 0; i < out.policy.size(); ++i)
    out.policy[i] = std::exp(out.log_policy[i]);
  out.value = tape.val(vhead).data[0];
  state.h = tape.val(h);
  state.c = tape.val(c);
  return out;
}

std::vector<float> classifier_forward(const AgentParams& params,
                                      const Frame& frame,
                                      const std::vector<int>& instruction) {
  const AgentArch& arch = params.arch;
  if (!arch.classifier)
    throw std::logic_error("classifier_forward: params have no classifier head");
  if (frame.width != arch.in_w || frame.height != arch.in_h)
    throw std::invalid_argument("classifier_forward: frame size mismatch");

  Tape tape;
  AgentNet<float> net(tape, params, /*needs_grad=*/false);
  const auto fid = tape.value(frame_to_tensor(frame));
  const auto visual = net.conv_stack(fid);
  const auto lang = net.encode_instruction(instruction);
  AgentState st = initial_state(arch);
  const auto h0 = tape.value(st.h);
  const auto c0 = tape.value(st.c);
  const auto [h, c] = net.memory_step(visual, lang, std::nullopt, h0, c0);
  (void)c;
  const auto logp = tape.log_softmax(net.classifier_logits(h));
  std::vector<float> probs(2);
  for (int i = 0; i < 2; ++i) probs[i] = std::exp(tape.val(logp).data[i]);
  return probs;
}

Action act_greedy(const std::vector<float>& policy) {
  size_t best = 0;
  for (size_t i = 1; i < policy.size(); ++i)
    if (policy[i] > policy[best]) best = i;
  return static_cast<Action>(best);
}

Action act_sample(const std::vector<float>& policy, RngStream& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (size_t i = 0; i < policy.size(); ++i) {
    acc += policy[i];
    if (u < acc) return static_cast<Action>(i);
  }
  return static_cast<Action>(policy.size() - 1);
}

}  // namespace gridlab
