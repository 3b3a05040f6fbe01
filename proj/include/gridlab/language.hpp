#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gridlab/world.hpp"

namespace gridlab {

struct SplitSpec;  // tasks.hpp

// Dense token ids; id 0 is reserved for padding/empty.
struct Vocab {
  std::vector<std::string> tokens;  // id -> token, tokens[0] == "<pad>"
  std::unordered_map<std::string, int> ids;

  int size() const { return static_cast<int>(tokens.size()); }
};

// Renders the instruction template for a (verb, negation, words) tuple:
//   find + color+shape  -> "find a <color> <shape>"
//   find + shape        -> "find a <shape>" / "find a not <shape>"
//   lift                -> "lift a <shape>"
//   put                 -> "put a <shape> on the bed"
//   collect             -> "<color> <shape>", or "" without language
std::string render_instruction(Verb verb, bool negated,
                               const std::string& color_word,
                               const std::string& shape_word,
                               bool with_language);

std::string instruction_for(const EpisodeSpec& spec);

// Vocabulary over every instruction the split can emit (train and test).
Vocab build_vocab(const SplitSpec& split);

// Whitespace split + lookup. Unknown token -> std::out_of_range.
std::vector<int> tokenize_encode(const std::string& s, const Vocab& v);
std::string decode(const std::vector<int>& ids, const Vocab& v);

}  // namespace gridlab
