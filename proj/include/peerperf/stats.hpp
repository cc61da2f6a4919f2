#pragma once

#include <cstddef>
#include <vector>

namespace peerperf {

double norm_pdf(double x);
double norm_cdf(double x);

// Inverse standard normal CDF, |error| < 1e-13 on (0,1).
double norm_inv(double p);

// Two-sided p-value under the standard normal reference: 2*(1 - Phi(|t|)).
double two_sided_p(double t);

double digamma(double x);

// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1).
double ks_uniform_statistic(std::vector<double> p);

}  // namespace peerperf
