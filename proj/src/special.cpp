#include "doseopt/special.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "doseopt/error.hpp"

namespace doseopt {

double beta_tail(double a, double b, double t) {
  require(std::isfinite(a) && a > 0.0, ErrorCode::kValidation, "beta shape a must be > 0", "a");
  require(std::isfinite(b) && b > 0.0, ErrorCode::kValidation, "beta shape b must be > 0", "b");
  require(t >= 0.0 && t <= 1.0, ErrorCode::kValidation, "threshold must lie in [0, 1]", "t");
  if (t == 0.0) return 1.0;
  if (t == 1.0) return 0.0;
  return boost::math::ibetac(a, b, t);
}

namespace {

void check_binom(int n, double p) {
  require(n >= 0, ErrorCode::kValidation, "binomial size must be nonnegative", "n");
  require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidProbability,
          "binomial probability must lie in [0, 1]", "p");
}

long double pmf_ld(int k, int n, long double p) {
  if (k < 0 || k > n) return 0.0L;
  if (p == 0.0L) return k == 0 ? 1.0L : 0.0L;
  if (p == 1.0L) return k == n ? 1.0L : 0.0L;
  const long double log_choose =
      std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
      std::lgamma(static_cast<long double>(n - k) + 1);
  return std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace

double binom_pmf(int k, int n, double p) {
  check_binom(n, p);
  return static_cast<double>(pmf_ld(k, n, p));
}

double binom_cdf(int k, int n, double p) {
  check_binom(n, p);
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return binom_cdf_table(n, p)[k];
}

double binom_survival(int k, int n, double p) {
  check_binom(n, p);
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return binom_survival_table(n, p)[k];
}

namespace {

// Prefix sums from the left and suffix sums from the right, both in a fixed
// order, so every caller sees bit-identical values for the same (k, n, p).
struct Tails {
  std::vector<long double> lower;  // lower[k] = sum_{i <= k} pmf_i
  std::vector<long double> upper;  // upper[k] = sum_{i >= k} pmf_i
};

Tails tails(int n, double p) {
  Tails t{std::vector<long double>(n + 1), std::vector<long double>(n + 2, 0.0L)};
  long double acc = 0.0L;
  for (int i = 0; i <= n; ++i) {
    acc += pmf_ld(i, n, p);
    t.lower[i] = acc;
  }
  acc = 0.0L;
  for (int i = n; i >= 0; --i) {
    acc += pmf_ld(i, n, p);
    t.upper[i] = acc;
  }
  return t;
}

double pick(long double direct, long double complement) {
  // Sum the shorter-mass side directly so tiny tails keep their relative accuracy.
  const long double value = direct <= complement ? direct : 1.0L - complement;
  return static_cast<double>(std::clamp(value, 0.0L, 1.0L));
}

}  // namespace

std::vector<double> binom_cdf_table(int n, double p) {
  check_binom(n, p);
  const Tails t = tails(n, p);
  std::vector<double> out(n + 1);
  for (int k = 0; k < n; ++k) out[k] = pick(t.lower[k], t.upper[k + 1]);
  out[n] = 1.0;
  return out;
}

std::vector<double> binom_survival_table(int n, double p) {
  check_binom(n, p);
  const Tails t = tails(n, p);
  std::vector<double> out(n + 2);
  out[0] = 1.0;
  for (int k = 1; k <= n; ++k) out[k] = pick(t.upper[k], t.lower[k - 1]);
  out[n + 1] = 0.0;
  return out;
}

}  // namespace doseopt
