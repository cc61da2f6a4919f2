#include "peerperf/ols.hpp"

#include "peerperf/errors.hpp"

namespace peerperf {

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    if (y.size() != X.rows()) throw AlignmentError("y and X row counts differ");
    if (X.rows() <= X.cols()) {
        throw InsufficientDataError("need more observations than regressors");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        throw SingularDesignError("design matrix is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " of " +
                                  std::to_string(X.cols()) + ")");
    }

    OlsFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    fit.t_obs = X.rows();
    fit.n_regressors = X.cols();
    return fit;
}

}  // namespace peerperf
