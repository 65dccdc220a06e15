#pragma once

// Posterior tail and binomial kernels shared by the rule modules.

#include <vector>

namespace doseopt {

// Pr(X > t) for X ~ Beta(a, b).
double beta_tail(double a, double b, double t);

// Pr(X = k), Pr(X <= k) and Pr(X >= k) for X ~ Binomial(n, p), by exact summation.
double binom_pmf(int k, int n, double p);
double binom_cdf(int k, int n, double p);
double binom_survival(int k, int n, double p);

// cdf[k] = Pr(X <= k) for k = 0..n and survival[k] = Pr(X >= k) for k = 0..n+1,
// identical to the scalar functions entry by entry.
std::vector<double> binom_cdf_table(int n, double p);
std::vector<double> binom_survival_table(int n, double p);

}  // namespace doseopt
