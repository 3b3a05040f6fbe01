#include "gridlab/evaluate.hpp"

#include "gridlab/language.hpp"

namespace gridlab {

EvalResult evaluate_params(const AgentParams& params, const SplitSpec& split,
                           Phase phase, const ViewConfig& view, int episodes,
                           RngStream rng, bool greedy) {
  const Vocab vocab = build_vocab(split);

  std::vector<double> returns(episodes, 0.0), lengths(episodes, 0.0);
  std::vector<int> first_event(episodes, 0);  // 0 none, 1 correct, -1 wrong

#pragma omp parallel for schedule(dynamic, 8)
  for (int e = 0; e < episodes; ++e) {
    RngStream ep_rng = rng.split(static_cast<std::uint64_t>(e));
    RngStream act_rng = ep_rng.split(1);
    EpisodeSpec spec = sample_episode(split, phase, ep_rng);
    const std::vector<int> instr = tokenize_encode(spec.instruction, vocab);
    WorldState ws = reset(spec);
    AgentState state = initial_state(params.arch);
    float prev_reward = 0.0f;
    bool saw_event = false;
    while (!ws.done) {
      const Frame obs = render(ws, view);
      const AgentOutput out =
          agent_step(params, obs, instr, prev_reward, state);
      const Action a =
          greedy ? act_greedy(out.policy) : act_sample(out.policy, act_rng);
      auto [next, res] = step(ws, a);
      ws = std::move(next);
      prev_reward = static_cast<float>(res.reward);
      if (!saw_event && res.event != StepEvent::none &&
          res.event != StepEvent::timeout) {
        saw_event = true;
        const bool good = res.event == StepEvent::correct_find ||
                          res.event == StepEvent::correct_pickup ||
                          res.event == StepEvent::correct_put;
        first_event[e] = good ? 1 : -1;
      }
    }
    returns[e] = ws.accumulated_return;
    lengths[e] = ws.step_count;
  }

  EvalResult res;
  res.episodes = episodes;
  double ret = 0, len = 0;
  int contacted = 0, contacted_correct = 0;
  double cond_sum = 0;
  int cond_n = 0;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    ret += returns[e];
    len += lengths[e];
    if (first_event[e] != 0) {
      ++contacted;
      if (first_event[e] > 0) ++contacted_correct;
    }
    if (split.task == TaskKind::collect) {
      if (first_event[e] > 0) {
        cond_sum += returns[e] / 4.0;
        ++cond_n;
      }
    } else if (returns[e] >= 1.0) {
      ++successes;
    }
  }
  res.mean_return = ret / episodes;
  res.mean_length = len / episodes;
  res.first_event_correct =
      contacted > 0 ? static_cast<double>(contacted_correct) / contacted : 0.0;
  if (split.task == TaskKind::collect) {
    res.conditioned_return = cond_n > 0 ? cond_sum / cond_n : 0.0;
    res.accuracy = res.conditioned_return;
  } else {
    res.accuracy = static_cast<double>(successes) / episodes;
  }
  return res;
}

}  // namespace gridlab
