#include "gridlab/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridlab {
namespace {

// Lentz's continued fraction for the incomplete beta
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0)
    throw std::invalid_argument("incomplete_beta: a, b must be positive");
  if (x < 0 || x > 1)
    throw std::invalid_argument("incomplete_beta: x must be in [0, 1]");
  if (x == 0) return 0.0;
  if (x == 1) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw std::invalid_argument("student_t_two_sided_p: df < 1");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(df / 2.0, 0.5, x);
}

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  r.n = static_cast<int>(xs.size());
  if (r.n == 0) return r;
  for (double x : xs) r.mean += x;
  r.mean /= r.n;
  if (r.n < 2) return r;
  double ss = 0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / (r.n - 1));
  return r;
}

TTestResult ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("ttest: both groups need at least 2 samples");
  const MeanSd ma = mean_sd(a);
  const MeanSd mb = mean_sd(b);
  TTestResult r;
  r.df = ma.n + mb.n - 2;
  const double pooled_var =
      ((ma.n - 1) * ma.sd * ma.sd + (mb.n - 1) * mb.sd * mb.sd) / r.df;
  if (pooled_var == 0.0) {
    r.zero_variance = true;
    if (ma.mean == mb.mean) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  const double se = std::sqrt(pooled_var * (1.0 / ma.n + 1.0 / mb.n));
  r.t = (ma.mean - mb.mean) / se;
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace gridlab
