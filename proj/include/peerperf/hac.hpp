#pragma once

#include <Eigen/Dense>

namespace peerperf {

enum class LrvKernel { quadratic_spectral, bartlett };

// Quadratic-spectral kernel weight at x = lag / bandwidth.
double qs_kernel(double x);

// AR(1) coefficient of a series, clamped to |rho| <= 0.97.
double ar1_coef(const Eigen::VectorXd& v);

// Long-run variance of a scalar score series (caller demeans). Quadratic
// spectral kernel with Andrews's AR(1) plug-in bandwidth; optional AR(1)
// prewhitening with 1/(1-rho)^2 recoloring. Requires T >= 20.
double hac_lrv(const Eigen::VectorXd& v, bool prewhiten,
               LrvKernel kernel = LrvKernel::quadratic_spectral);

// Multivariate analogue for a T x K matrix of score vectors. One bandwidth for
// all components (equal-weight AR(1) plug-in); prewhitening is per-component
// AR(1) with diagonal recoloring.
Eigen::MatrixXd hac_lrv_matrix(const Eigen::MatrixXd& scores, bool prewhiten,
                               LrvKernel kernel = LrvKernel::quadratic_spectral);

// Truncated-kernel LRV with uniform weights on lags 0..L (Hansen-Hodrick
// style); with bartlett_weights the weights decay linearly instead.
Eigen::MatrixXd truncated_lrv_matrix(const Eigen::MatrixXd& scores, int max_lag,
                                     bool bartlett_weights);

// Coefficient covariance (X'X/T)^-1 S (X'X/T)^-1 / T for a given score LRV S.
Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& X, const Eigen::MatrixXd& lrv);

// Score vectors x_t * e_t as rows.
Eigen::MatrixXd regression_scores(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& residuals);

}  // namespace peerperf
