#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "gridlab/config.hpp"
#include "gridlab/rng.hpp"
#include "gridlab/types.hpp"

using namespace gridlab;

TEST_CASE("rng: identical (seed, stream) replays identically") {
  RngStream a = derive_stream(42, 0);
  RngStream b = derive_stream(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: distinct streams diverge") {
  RngStream a = derive_stream(42, 0);
  RngStream b = derive_stream(42, 1);
  int same = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("rng: golden first draw") {
  RngStream s = derive_stream(42, 7);
  CHECK(s.next_u64() == 7242140450573304295ULL);
}

TEST_CASE("rng: uniform doubles stay in [0,1) and look uniform") {
  RngStream s = derive_stream(7, 3);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = s.next_double();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rng: next_below respects the bound") {
  RngStream s = derive_stream(9, 1);
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 5000; ++i) {
    const auto v = s.next_below(9);
    REQUIRE(v < 9);
    seen.insert(v);
  }
  CHECK(seen.size() == 9);
}

TEST_CASE("rng: split children are independent of the parent tail") {
  RngStream parent = derive_stream(5, 2);
  RngStream child1 = parent.split(0);
  RngStream child2 = parent.split(1);
  CHECK(child1.next_u64() != child2.next_u64());
  // splitting again gives the same child streams
  RngStream again = derive_stream(5, 2).split(0);
  RngStream c1 = parent.split(0);
  CHECK(again.next_u64() == c1.next_u64());
}

TEST_CASE("palette: ten distinct colors, min pairwise distance >= 60") {
  const auto& pal = palette10();
  REQUIRE(pal.size() == 10);
  std::set<std::string> names;
  for (const auto& c : pal) names.insert(c.name);
  CHECK(names.size() == 10);
  double min_d = 1e9;
  for (size_t i = 0; i < pal.size(); ++i) {
    for (size_t j = i + 1; j < pal.size(); ++j) {
      const double dr = double(pal[i].rgb.r) - pal[j].rgb.r;
      const double dg = double(pal[i].rgb.g) - pal[j].rgb.g;
      const double db = double(pal[i].rgb.b) - pal[j].rgb.b;
      min_d = std::min(min_d, std::sqrt(dr * dr + dg * dg + db * db));
    }
  }
  CHECK(min_d >= 60.0);
}

TEST_CASE("config: default find task derives 99x99x3 frames") {
  ExperimentConfig cfg;
  REQUIRE(validate_config(cfg).empty());
  CHECK(cfg.derived.frame_w == 99);
  CHECK(cfg.derived.frame_h == 99);
  CHECK(cfg.derived.actions == 4);
  CHECK(cfg.derived.vocab_size > 0);
}

TEST_CASE("config: egocentric 5-cell window at 9 px gives 45x45") {
  ExperimentConfig cfg;
  cfg.view_mode = ViewMode::egocentric_partial;
  REQUIRE(validate_config(cfg).empty());
  CHECK(cfg.derived.frame_w == 45);
}

TEST_CASE("config: large modes derive 147x147") {
  for (ViewMode m : {ViewMode::egocentric_full, ViewMode::allocentric_large}) {
    ExperimentConfig cfg;
    cfg.view_mode = m;
    REQUIRE(validate_config(cfg).empty());
    CHECK(cfg.derived.frame_w == 147);
  }
}

TEST_CASE("config: partial window larger than the grid is rejected") {
  ExperimentConfig cfg;
  cfg.view_mode = ViewMode::egocentric_partial;
  cfg.window_cells = 13;
  const auto errors = validate_config(cfg);
  REQUIRE(!errors.empty());
  CHECK(errors[0].find("view.window_cells") != std::string::npos);
}

TEST_CASE("config: every violation is reported, not just the first") {
  ExperimentConfig cfg;
  cfg.view_mode = ViewMode::egocentric_partial;
  cfg.window_cells = 13;
  cfg.gamma = 1.5;
  cfg.batch = 0;
  const auto errors = validate_config(cfg);
  CHECK(errors.size() >= 3);
  CHECK(!cfg.derived.valid);
}

TEST_CASE("config: unknown keys are an error") {
  ExperimentConfig cfg;
  CHECK_THROWS_WITH_AS(apply_kv(cfg, "learner.warmup", "10"),
                       doctest::Contains("unknown configuration key"),
                       std::invalid_argument);
}

TEST_CASE("config: file parsing round trip") {
  const std::string text =
      "# comment\n"
      "task = collect\n"
      "view.mode = egocentric_partial\n"
      "agent.channels = 16, 16, 8\n"
      "learner.lr = 0.001\n"
      "seed = 17\n";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.task == TaskKind::collect);
  CHECK(cfg.view_mode == ViewMode::egocentric_partial);
  CHECK(cfg.channels[2] == 8);
  CHECK(cfg.lr == doctest::Approx(0.001));
  CHECK(cfg.seed == 17);
  CHECK(cfg.derived.prev_reward);  // auto: collect feeds the last reward back
}

TEST_CASE("config: bad values name the key") {
  ExperimentConfig cfg;
  CHECK_THROWS_WITH_AS(apply_kv(cfg, "learner.lr", "fast"),
                       doctest::Contains("learner.lr"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("task = juggle\n"), std::invalid_argument);
}
