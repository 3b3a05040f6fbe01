#include <doctest.h>

#include <stdexcept>
#include <sstream>

#include <set>

#include "gridlab/language.hpp"
#include "gridlab/tasks.hpp"

using namespace gridlab;

TEST_CASE("language: instruction templates") {
  CHECK(render_instruction(Verb::find, false, "red", "circle", true) ==
        "find a red circle");
  CHECK(render_instruction(Verb::find, false, "", "cross", true) ==
        "find a cross");
  CHECK(render_instruction(Verb::find, true, "", "cross", true) ==
        "find a not cross");
  CHECK(render_instruction(Verb::lift, false, "", "ring", true) ==
        "lift a ring");
  CHECK(render_instruction(Verb::put, false, "", "plus", true) ==
        "put a plus on the bed");
  CHECK(render_instruction(Verb::collect, false, "red", "square", true) ==
        "red square");
  CHECK(render_instruction(Verb::collect, false, "red", "square", false) == "");
}

TEST_CASE("language: tokenize, prefix sharing, round trip, OOV") {
  SplitParams params;
  RngStream rng = derive_stream(3, 1);
  const SplitSpec split = build_split(TaskKind::negfind, params, rng);
  const Vocab v = build_vocab(split);

  const auto pos = tokenize_encode("find a g3", v);
  const auto neg = tokenize_encode("find a not g3", v);
  CHECK(pos.size() == 3);
  CHECK(neg.size() == 4);
  CHECK(pos[0] == neg[0]);
  CHECK(pos[1] == neg[1]);
  CHECK(decode(neg, v) == "find a not g3");
  CHECK(tokenize_encode("", v).empty());
  CHECK_THROWS_AS(tokenize_encode("find a zebra", v), std::out_of_range);
}

TEST_CASE("language: vocabulary covers both phases, id 0 reserved") {
  SplitParams params;
  for (TaskKind task : {TaskKind::find, TaskKind::lift, TaskKind::put,
                        TaskKind::negfind, TaskKind::collect}) {
    RngStream rng = derive_stream(4, static_cast<int>(task));
    const SplitSpec split = build_split(task, params, rng);
    const Vocab v = build_vocab(split);
    CHECK(v.tokens[0] == "<pad>");
    for (const auto& combo : split.train)
      CHECK_NOTHROW(tokenize_encode(instruction_for_combo(split, combo), v));
    for (const auto& combo : split.test)
      CHECK_NOTHROW(tokenize_encode(instruction_for_combo(split, combo), v));
  }
}

TEST_CASE("split: color-shape counts are 96 train / 4 test") {
  SplitParams params;
  RngStream rng = derive_stream(5, 1);
  const SplitSpec split = build_split(TaskKind::find, params, rng);
  CHECK(split.train.size() == 96);
  CHECK(split.test.size() == 4);
  // held-out pairs are exactly test-color x test-shape
  for (const auto& c : split.test) {
    CHECK(c.color >= kNumTrainColors);
    CHECK(c.shape >= kNumTrainShapes);
  }
}

TEST_CASE("split: put allocates 3 put-train, 7 put-test, 10 lift-train") {
  SplitParams params;
  RngStream rng = derive_stream(6, 1);
  const SplitSpec split = build_split(TaskKind::put, params, rng);
  int lift_train = 0, put_train = 0;
  for (const auto& c : split.train)
    (c.verb == Verb::lift ? lift_train : put_train)++;
  CHECK(lift_train == 10);
  CHECK(put_train == 3);
  CHECK(split.test.size() == 7);
  for (const auto& c : split.test) CHECK(c.verb == Verb::put);
}

TEST_CASE("split: negation scales the shape universe, positives cover all") {
  for (int n1 : {6, 40, 100}) {
    SplitParams params;
    params.negation_train_size = n1;
    RngStream rng = derive_stream(7, n1);
    const SplitSpec split = build_split(TaskKind::negfind, params, rng);
    CHECK(static_cast<int>(split.shapes.size()) == n1 + 8);
    int pos = 0, neg = 0;
    std::set<int> pos_shapes;
    for (const auto& c : split.train) {
      if (c.negated) ++neg;
      else {
        ++pos;
        pos_shapes.insert(c.shape);
      }
    }
    CHECK(pos == n1 + 8);  // find a x for every shape
    CHECK(neg == n1);
    CHECK(static_cast<int>(pos_shapes.size()) == n1 + 8);
    CHECK(split.test.size() == 8);
    for (const auto& c : split.test) CHECK(c.negated);
  }
}

TEST_CASE("split: collect partitions the 100 combos 50/50") {
  SplitParams params;
  RngStream rng = derive_stream(8, 1);
  const SplitSpec split = build_split(TaskKind::collect, params, rng);
  CHECK(split.train.size() == 50);
  CHECK(split.test.size() == 50);
  std::set<std::pair<int, int>> all;
  for (const auto& c : split.train) all.insert({c.color, c.shape});
  for (const auto& c : split.test) all.insert({c.color, c.shape});
  CHECK(all.size() == 100);
}

TEST_CASE("split: typical-color mode holds out all but one color pairing") {
  SplitParams params;
  params.mode = "typical_color";
  RngStream rng = derive_stream(9, 1);
  const SplitSpec split = build_split(TaskKind::find, params, rng);
  // train: 10 colors x 8 shapes + 1 typical color x 2 held shapes
  CHECK(split.train.size() == 82);
  CHECK(split.test.size() == 18);
  std::set<std::string> test_instr;
  for (const auto& c : split.test)
    test_instr.insert(instruction_for_combo(split, c));
  for (const auto& c : split.train)
    CHECK(test_instr.count(instruction_for_combo(split, c)) == 0);
}

TEST_CASE("split: disjointness and token coverage across tasks") {
  SplitParams params;
  for (TaskKind task : {TaskKind::find, TaskKind::lift, TaskKind::put,
                        TaskKind::negfind, TaskKind::collect}) {
    RngStream rng = derive_stream(10, static_cast<int>(task));
    const SplitSpec split = build_split(task, params, rng);
    std::set<std::string> train_instr, train_tokens;
    for (const auto& c : split.train) {
      const std::string s = instruction_for_combo(split, c);
      train_instr.insert(s);
      std::istringstream in(s);
      std::string w;
      while (in >> w) train_tokens.insert(w);
    }
    for (const auto& c : split.test) {
      const std::string s = instruction_for_combo(split, c);
      if (task == TaskKind::collect && !split.collect_language) continue;
      CHECK(train_instr.count(s) == 0);
      std::istringstream in(s);
      std::string w;
      while (in >> w) CHECK(train_tokens.count(w) == 1);
    }
  }
}

TEST_CASE("sample: train episode instructions never leave the train set") {
  SplitParams params;
  RngStream rng = derive_stream(11, 1);
  const SplitSpec split = build_split(TaskKind::find, params, rng);
  std::set<std::string> test_instr;
  for (const auto& c : split.test)
    test_instr.insert(instruction_for_combo(split, c));
  RngStream srng = derive_stream(11, 2);
  for (int i = 0; i < 5000; ++i) {
    const EpisodeSpec ep = sample_episode(split, Phase::train, srng);
    CHECK(test_instr.count(ep.instruction) == 0);
  }
}

TEST_CASE("sample: the confound shares exactly one attribute") {
  SplitParams params;
  RngStream rng = derive_stream(12, 1);
  const SplitSpec split = build_split(TaskKind::find, params, rng);
  RngStream srng = derive_stream(12, 2);
  int share_color = 0, share_shape = 0;
  for (int i = 0; i < 4000; ++i) {
    for (Phase phase : {Phase::train, Phase::test}) {
      const EpisodeSpec ep = sample_episode(split, phase, srng);
      const auto& a = ep.objects[0].first;
      const auto& b = ep.objects[1].first;
      const bool same_color = a.color.name == b.color.name;
      const bool same_shape = a.shape.name == b.shape.name;
      CHECK(same_color != same_shape);
      (same_color ? share_color : share_shape)++;
    }
  }
  // both confound kinds appear, in roughly even proportion
  CHECK(share_color > 3000);
  CHECK(share_shape > 3000);
}

TEST_CASE("sample: negated test episodes reward the other object") {
  SplitParams params;
  RngStream rng = derive_stream(13, 1);
  const SplitSpec split = build_split(TaskKind::negfind, params, rng);
  RngStream srng = derive_stream(13, 2);
  for (int i = 0; i < 500; ++i) {
    const EpisodeSpec ep = sample_episode(split, Phase::test, srng);
    REQUIRE(ep.instr.negated);
    // the named shape is present as object 0 but object 1 is correct
    CHECK(ep.objects[0].first.shape.name == ep.instr.shape_word);
    CHECK(ep.correct == std::vector<int>{1});
    CHECK(ep.instruction.find("not") != std::string::npos);
  }
}

TEST_CASE("sample: collect episodes hold 4+4 objects one attribute apart") {
  SplitParams params;
  RngStream rng = derive_stream(14, 1);
  const SplitSpec split = build_split(TaskKind::collect, params, rng);
  RngStream srng = derive_stream(14, 2);
  for (int i = 0; i < 500; ++i) {
    const EpisodeSpec ep = sample_episode(split, Phase::train, srng);
    REQUIRE(ep.objects.size() == 8);
    const auto& t = ep.objects[0].first;
    const auto& d = ep.objects[4].first;
    for (int k = 0; k < 4; ++k) {
      CHECK(ep.objects[k].first.color.name == t.color.name);
      CHECK(ep.objects[k].first.shape.name == t.shape.name);
      CHECK(ep.objects[4 + k].first.color.name == d.color.name);
      CHECK(ep.objects[4 + k].first.shape.name == d.shape.name);
    }
    const bool same_color = t.color.name == d.color.name;
    const bool same_shape = t.shape.name == d.shape.name;
    CHECK(same_color != same_shape);
    CHECK(ep.correct == std::vector<int>{0, 1, 2, 3});
  }
}

TEST_CASE("sample: placements stay disjoint and interior") {
  SplitParams params;
  RngStream rng = derive_stream(15, 1);
  const SplitSpec split = build_split(TaskKind::collect, params, rng);
  RngStream srng = derive_stream(15, 2);
  for (int i = 0; i < 500; ++i) {
    const EpisodeSpec ep = sample_episode(split, Phase::train, srng);
    std::set<std::pair<int, int>> cells;
    for (const auto& [obj, pos] : ep.objects) {
      (void)obj;
      CHECK(in_interior(pos));
      cells.insert({pos.row, pos.col});
    }
    cells.insert({ep.agent_start.row, ep.agent_start.col});
    CHECK(cells.size() == ep.objects.size() + 1);
  }
}

TEST_CASE("glyph universe: deterministic, separated, bounded fill") {
  const GlyphUniverse u = glyph_universe(108, 1);
  REQUIRE(u.n == 108);
  CHECK(u.names.front() == "g0");
  CHECK(u.names.back() == "g107");
  for (int i = 0; i < u.n; ++i) {
    int set = 0;
    for (auto v : u.masks[i]) set += v;
    CHECK(set >= kGlyphMinSet);
    CHECK(set <= kGlyphMaxSet);
    for (int j = i + 1; j < u.n; ++j) {
      int ham = 0;
      for (int k = 0; k < 49; ++k) ham += u.masks[i][k] != u.masks[j][k];
      CHECK(ham >= kGlyphMinHamming);
    }
  }
  const GlyphUniverse again = glyph_universe(108, 1);
  CHECK(again.masks == u.masks);
  const GlyphUniverse other = glyph_universe(108, 2);
  CHECK(other.masks != u.masks);
}

TEST_CASE("glyph universe: n=1 and bounds") {
  CHECK(glyph_universe(1, 9).n == 1);
  CHECK_THROWS_AS(glyph_universe(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(glyph_universe(1000, 1), std::invalid_argument);
}

TEST_CASE("split json: dumps both sides with instructions") {
  SplitParams params;
  RngStream rng = derive_stream(16, 1);
  const SplitSpec split = build_split(TaskKind::find, params, rng);
  const std::string json = split_to_json(split);
  CHECK(json.find("\"task\": \"find\"") != std::string::npos);
  CHECK(json.find("\"train\"") != std::string::npos);
  CHECK(json.find("\"test\"") != std::string::npos);
  CHECK(json.find("find a ") != std::string::npos);
}
