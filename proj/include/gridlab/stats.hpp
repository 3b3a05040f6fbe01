#pragma once

#include <vector>

namespace gridlab {

struct MeanSd {
  double mean = 0;
  double sd = 0;  // n-1 denominator
  int n = 0;
};

MeanSd mean_sd(const std::vector<double>& xs);

struct TTestResult {
  double t = 0;
  int df = 0;
  double p = 1.0;  // two-sided
  bool zero_variance = false;
};

// Two-sample pooled-variance Student t; df = n_a + n_b - 2. Zero pooled
// variance reports an infinite t with the flag set (p = 0 for distinct
// means, p = 1 otherwise). Requires n_a, n_b >= 2.
TTestResult ttest(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p for a Student t statistic.
double student_t_two_sided_p(double t, int df);

}  // namespace gridlab
