#include "peerperf/pairwise.hpp"

#include <cmath>
#include <vector>

#include "peerperf/errors.hpp"
#include "peerperf/hac.hpp"
#include "peerperf/ols.hpp"
#include "peerperf/stats.hpp"

namespace peerperf {

double pvalue_from_t(double t) { return two_sided_p(t); }

PairTest pairwise_alpha_test(const Eigen::VectorXd& r_i, const Eigen::VectorXd& r_j,
                             const Eigen::MatrixXd& factors,
                             const std::string& firm_i, const std::string& firm_j,
                             int min_obs) {
    if (r_i.size() != r_j.size() || r_i.size() != factors.rows()) {
        throw AlignmentError("return series and factor rows must align");
    }

    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(r_i.size()));
    for (Eigen::Index t = 0; t < r_i.size(); ++t) {
        if (!std::isnan(r_i[t]) && !std::isnan(r_j[t])) rows.push_back(t);
    }
    const auto t_obs = static_cast<Eigen::Index>(rows.size());
    if (t_obs < min_obs) {
        throw InsufficientDataError("pairwise overlap " + std::to_string(t_obs) +
                                    " below minimum " + std::to_string(min_obs) +
                                    " for pair (" + firm_i + ", " + firm_j + ")");
    }

    const Eigen::Index k = factors.cols();
    Eigen::VectorXd y(t_obs);
    Eigen::MatrixXd x(t_obs, k + 1);
    for (Eigen::Index r = 0; r < t_obs; ++r) {
        y[r] = r_i[rows[static_cast<std::size_t>(r)]] - r_j[rows[static_cast<std::size_t>(r)]];
        x(r, 0) = 1.0;
        x.row(r).tail(k) = factors.row(rows[static_cast<std::size_t>(r)]);
    }

    OlsFit fit = ols_fit(y, x);

    PairTest out;
    out.firm_i = firm_i;
    out.firm_j = firm_j;
    out.delta_alpha = fit.coef[0];
    out.t_obs = static_cast<int>(t_obs);

    const double resid_rms = std::sqrt(fit.residuals.squaredNorm() /
                                       static_cast<double>(t_obs));
    const double y_scale = std::max(1e-30, std::sqrt(y.squaredNorm() /
                                                     static_cast<double>(t_obs)));
    if (resid_rms <= 1e-12 * std::max(1.0, y_scale)) {
        // Zero residual variance: the pair is kept so the peer count stays
        // stable; the p-value collapses to the point decision on delta alpha.
        out.degenerate = true;
        out.hac_se = 0.0;
        out.t_stat = 0.0;
        out.p_value = std::fabs(out.delta_alpha) <= 1e-14 ? 1.0 : 0.0;
        return out;
    }

    Eigen::MatrixXd scores = regression_scores(x, fit.residuals);
    Eigen::MatrixXd lrv = hac_lrv_matrix(scores, /*prewhiten=*/true);
    Eigen::MatrixXd cov = sandwich_cov(x, lrv);
    out.hac_se = std::sqrt(std::max(0.0, cov(0, 0)));
    if (out.hac_se > 0.0) {
        out.t_stat = out.delta_alpha / out.hac_se;
        out.p_value = pvalue_from_t(out.t_stat);
    } else {
        out.degenerate = true;
        out.t_stat = 0.0;
        out.p_value = std::fabs(out.delta_alpha) <= 1e-14 ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace peerperf
