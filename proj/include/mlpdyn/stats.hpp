#pragma once

#include <functional>
#include <span>

namespace mlpdyn {

// P[X <= x] for X ~ chi^2(dof).
double chi_squared_cdf(double x, double dof);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double pvalue = 1.0;
};

// One-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic
// Kolmogorov distribution with Stephens' finite-n correction
// lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_survival(double lambda);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

}  // namespace mlpdyn
