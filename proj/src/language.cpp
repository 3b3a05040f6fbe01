#include "gridlab/language.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gridlab/tasks.hpp"

namespace gridlab {

std::string render_instruction(Verb verb, bool negated,
                               const std::string& color_word,
                               const std::string& shape_word,
                               bool with_language) {
  switch (verb) {
    case Verb::find:
      if (negated) return "find a not " + shape_word;
      if (!color_word.empty()) return "find a " + color_word + " " + shape_word;
      return "find a " + shape_word;
    case Verb::lift:
      return "lift a " + shape_word;
    case Verb::put:
      return "put a " + shape_word + " on the bed";
    case Verb::collect:
      if (!with_language) return "";
      return color_word + " " + shape_word;
  }
  return "";
}

std::string instruction_for(const EpisodeSpec& spec) {
  return render_instruction(spec.instr.verb, spec.instr.negated,
                            spec.instr.color_word, spec.instr.shape_word,
                            spec.instr.with_language);
}

Vocab build_vocab(const SplitSpec& split) {
  std::set<std::string> words;
  auto add = [&](const InstrCombo& c) {
    std::istringstream in(instruction_for_combo(split, c));
    std::string w;
    while (in >> w) words.insert(w);
  };
  for (const auto& c : split.train) add(c);
  for (const auto& c : split.test) add(c);

  Vocab v;
  v.tokens.push_back("<pad>");
  for (const auto& w : words) v.tokens.push_back(w);
  for (int i = 0; i < static_cast<int>(v.tokens.size()); ++i)
    v.ids[v.tokens[i]] = i;
  return v;
}

std::vector<int> tokenize_encode(const std::string& s, const Vocab& v) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) {
    auto it = v.ids.find(w);
    if (it == v.ids.end())
      throw std::out_of_range("token not in vocabulary: " + w);
    out.push_back(it->second);
  }
  return out;
}

std::string decode(const std::vector<int>& ids, const Vocab& v) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] <= 0 || ids[i] >= v.size())
      throw std::out_of_range("token id out of range: " + std::to_string(ids[i]));
    if (i) out += ' ';
    out += v.tokens[ids[i]];
  }
  return out;
}

}  // namespace gridlab
