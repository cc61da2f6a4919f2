#pragma once

#include <Eigen/Dense>

namespace peerperf {

struct OlsFit {
    Eigen::VectorXd coef;       // intercept first when X is built that way
    Eigen::VectorXd residuals;  // length T
    Eigen::Index t_obs = 0;
    Eigen::Index n_regressors = 0;  // columns of X, intercept included
};

// Least squares via column-pivoted Householder QR; throws SingularDesignError
// on rank deficiency.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

}  // namespace peerperf
