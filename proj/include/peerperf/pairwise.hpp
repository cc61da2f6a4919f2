#pragma once

#include <Eigen/Dense>
#include <string>

#include "peerperf/panels.hpp"

namespace peerperf {

struct PairTest {
    std::string firm_i;
    std::string firm_j;
    double delta_alpha = 0.0;  // daily decimal
    double hac_se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    int t_obs = 0;
    bool degenerate = false;  // zero residual variance
};

double pvalue_from_t(double t);

// Alpha differential of stock i over stock j: regress (r_i - r_j) on an
// intercept and the factor columns over pairwise-complete days, studentize the
// intercept with the prewhitened quadratic-spectral HAC sandwich. Returns in
// r_i / r_j may carry NaN for missing days; factors must be complete.
PairTest pairwise_alpha_test(const Eigen::VectorXd& r_i, const Eigen::VectorXd& r_j,
                             const Eigen::MatrixXd& factors,
                             const std::string& firm_i, const std::string& firm_j,
                             int min_obs = 60);

}  // namespace peerperf
