#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "gridlab/stats.hpp"

using namespace gridlab;

TEST_CASE("mean_sd: n-1 denominator") {
  const MeanSd m = mean_sd({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.n == 4);
}

TEST_CASE("ttest: moment-matched five-sample groups reproduce t(8) ~ 3.48") {
  // groups constructed to have means 0.63 / 0.40 and SDs 0.06 / 0.14
  const std::vector<double> a = {0.57, 0.57, 0.63, 0.69, 0.69};
  const std::vector<double> b = {0.26, 0.26, 0.40, 0.54, 0.54};
  const MeanSd ma = mean_sd(a), mb = mean_sd(b);
  CHECK(ma.mean == doctest::Approx(0.63));
  CHECK(ma.sd == doctest::Approx(0.06));
  CHECK(mb.mean == doctest::Approx(0.40));
  CHECK(mb.sd == doctest::Approx(0.14));

  const TTestResult r = ttest(a, b);
  CHECK(r.df == 8);
  CHECK(std::abs(r.t - 3.48) <= 0.15);  // rounding of the published SDs
  CHECK(r.p < 0.05);
  CHECK(!r.zero_variance);
}

TEST_CASE("ttest: identical groups give t = 0, p = 1") {
  const std::vector<double> g = {0.2, 0.4, 0.6};
  const TTestResult r = ttest(g, g);
  CHECK(r.t == 0.0);
  CHECK(r.p == doctest::Approx(1.0));
}

TEST_CASE("ttest: zero pooled variance raises the flag") {
  const TTestResult r = ttest({1, 1, 1, 1, 1}, {0, 0, 0, 0, 0});
  CHECK(r.zero_variance);
  CHECK(std::isinf(r.t));
  CHECK(r.p == 0.0);

  const TTestResult same = ttest({1, 1, 1}, {1, 1, 1});
  CHECK(same.zero_variance);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
}

TEST_CASE("ttest: groups need two samples each") {
  CHECK_THROWS_AS(ttest({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("student t p-values match a high-precision oracle to 1e-8") {
  // reference values computed once with 60-digit arithmetic
  struct Case {
    double t;
    int df;
    double p;
  };
  const Case cases[] = {
      {3.48, 8, 0.0083196300090335704},
      {1.38, 8, 0.2049227072385294},
      {2.35, 8, 0.046681257270468937},
      {8.61, 8, 2.5634835995596754e-5},
      {0.64, 8, 0.54006461915893485},
      {2.0, 4, 0.11611652351681559},
      {1.5, 30, 0.144065929128646},
      {2.5, 2, 0.12961172022151081},
      {0.5, 100, 0.61817356583088657},
      {3.3765312, 8, 0.0096913247481720215},
  };
  for (const auto& c : cases) {
    CHECK(std::abs(student_t_two_sided_p(c.t, c.df) - c.p) < 1e-8);
    // symmetry
    CHECK(student_t_two_sided_p(-c.t, c.df) ==
          doctest::Approx(student_t_two_sided_p(c.t, c.df)));
  }
}

TEST_CASE("incomplete beta: edge values and domain checks") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) = x
  CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK_THROWS_AS(incomplete_beta(-1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.5), std::invalid_argument);
}
