#include "peerperf/hac.hpp"

#include <cmath>

#include "peerperf/errors.hpp"

namespace peerperf {

namespace {

constexpr double kRhoClamp = 0.97;

struct Ar1 {
    double rho = 0.0;
    double sigma2 = 0.0;  // innovation variance
};

Ar1 ar1_fit(const Eigen::VectorXd& v) {
    const Eigen::Index t = v.size();
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 1; i < t; ++i) {
        num += v[i] * v[i - 1];
        den += v[i - 1] * v[i - 1];
    }
    Ar1 out;
    out.rho = den > 0.0 ? num / den : 0.0;
    if (out.rho > kRhoClamp) out.rho = kRhoClamp;
    if (out.rho < -kRhoClamp) out.rho = -kRhoClamp;
    double ss = 0.0;
    for (Eigen::Index i = 1; i < t; ++i) {
        double e = v[i] - out.rho * v[i - 1];
        ss += e * e;
    }
    out.sigma2 = t > 1 ? ss / static_cast<double>(t - 1) : 0.0;
    return out;
}

// Andrews's plug-in bandwidth for the given kernel, from per-component AR(1)
// fits with equal weights.
double plugin_bandwidth(const Eigen::MatrixXd& scores, LrvKernel kernel) {
    const Eigen::Index t = scores.rows();
    double num = 0.0, den = 0.0;
    for (Eigen::Index a = 0; a < scores.cols(); ++a) {
        Ar1 f = ar1_fit(scores.col(a));
        double s4 = f.sigma2 * f.sigma2;
        double om = 1.0 - f.rho;
        double op = 1.0 + f.rho;
        den += s4 / std::pow(om, 4);
        if (kernel == LrvKernel::quadratic_spectral) {
            num += 4.0 * f.rho * f.rho * s4 / std::pow(om, 8);
        } else {
            num += 4.0 * f.rho * f.rho * s4 / (std::pow(om, 6) * op * op);
        }
    }
    if (den <= 0.0 || num <= 0.0) return 0.0;
    double alpha = num / den;
    if (kernel == LrvKernel::quadratic_spectral) {
        return 1.3221 * std::pow(alpha * static_cast<double>(t), 0.2);
    }
    return 1.1447 * std::pow(alpha * static_cast<double>(t), 1.0 / 3.0);
}

double kernel_weight(LrvKernel kernel, double x) {
    if (kernel == LrvKernel::quadratic_spectral) return qs_kernel(x);
    return x < 1.0 ? 1.0 - x : 0.0;  // Bartlett
}

// Kernel-weighted sum of autocovariance matrices.
Eigen::MatrixXd weighted_lrv(const Eigen::MatrixXd& u, LrvKernel kernel,
                             double bandwidth) {
    const Eigen::Index t = u.rows();
    const double tn = static_cast<double>(t);
    Eigen::MatrixXd s = (u.transpose() * u) / tn;
    if (bandwidth <= 0.0) return s;
    // The quadratic-spectral kernel has unbounded support but its weights fall
    // off like x^-2; beyond a dozen bandwidths they are O(1e-3) and multiply
    // near-zero autocovariances, so the tail is numerically irrelevant.
    Eigen::Index j_max = std::min<Eigen::Index>(
        t - 1, std::max<Eigen::Index>(30, static_cast<Eigen::Index>(12.0 * bandwidth)));
    for (Eigen::Index j = 1; j <= j_max; ++j) {
        double w = kernel_weight(kernel, static_cast<double>(j) / bandwidth);
        if (kernel == LrvKernel::bartlett && w == 0.0) break;
        Eigen::MatrixXd g =
            (u.bottomRows(t - j).transpose() * u.topRows(t - j)) / tn;
        s += w * (g + g.transpose());
    }
    return s;
}

}  // namespace

double qs_kernel(double x) {
    if (x == 0.0) return 1.0;
    const double z = 6.0 * M_PI * x / 5.0;
    return 25.0 / (12.0 * M_PI * M_PI * x * x) * (std::sin(z) / z - std::cos(z));
}

double ar1_coef(const Eigen::VectorXd& v) { return ar1_fit(v).rho; }

double hac_lrv(const Eigen::VectorXd& v, bool prewhiten, LrvKernel kernel) {
    if (v.size() < 20) {
        throw InsufficientDataError("hac_lrv needs T >= 20, got " +
                                    std::to_string(v.size()));
    }
    return hac_lrv_matrix(v, prewhiten, kernel)(0, 0);
}

Eigen::MatrixXd hac_lrv_matrix(const Eigen::MatrixXd& scores, bool prewhiten,
                               LrvKernel kernel) {
    const Eigen::Index t = scores.rows();
    const Eigen::Index k = scores.cols();
    if (t < 4) throw InsufficientDataError("too few observations for LRV");

    if (scores.cwiseAbs().maxCoeff() == 0.0) {
        return Eigen::MatrixXd::Zero(k, k);
    }

    Eigen::MatrixXd u = scores;
    Eigen::VectorXd recolor = Eigen::VectorXd::Ones(k);
    if (prewhiten) {
        Eigen::MatrixXd w(t - 1, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            double rho = ar1_fit(scores.col(a)).rho;
            for (Eigen::Index i = 1; i < t; ++i) {
                w(i - 1, a) = scores(i, a) - rho * scores(i - 1, a);
            }
            recolor[a] = 1.0 / (1.0 - rho);
        }
        u = std::move(w);
    }

    double bw = plugin_bandwidth(u, kernel);
    Eigen::MatrixXd s = weighted_lrv(u, kernel, bw);
    s = recolor.asDiagonal() * s * recolor.asDiagonal();

    // The scalar QS estimate is nonnegative by construction up to roundoff;
    // clamp tiny negatives on the diagonal.
    for (Eigen::Index a = 0; a < k; ++a) {
        if (s(a, a) < 0.0) s(a, a) = 0.0;
    }
    return s;
}

Eigen::MatrixXd truncated_lrv_matrix(const Eigen::MatrixXd& scores, int max_lag,
                                     bool bartlett_weights) {
    const Eigen::Index t = scores.rows();
    const Eigen::Index k = scores.cols();
    if (max_lag < 0) throw DomainError("max_lag must be >= 0");
    if (max_lag >= t) max_lag = static_cast<int>(t) - 1;
    const double tn = static_cast<double>(t);
    Eigen::MatrixXd s = (scores.transpose() * scores) / tn;
    for (int j = 1; j <= max_lag; ++j) {
        double w = bartlett_weights
                       ? 1.0 - static_cast<double>(j) / (static_cast<double>(max_lag) + 1.0)
                       : 1.0;
        Eigen::MatrixXd g =
            (scores.bottomRows(t - j).transpose() * scores.topRows(t - j)) / tn;
        s += w * (g + g.transpose());
    }
    return s;
}

Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& X, const Eigen::MatrixXd& lrv) {
    const double tn = static_cast<double>(X.rows());
    Eigen::MatrixXd q = (X.transpose() * X) / tn;
    Eigen::MatrixXd qinv = q.ldlt().solve(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
    return qinv * lrv * qinv / tn;
}

Eigen::MatrixXd regression_scores(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& residuals) {
    return X.array().colwise() * residuals.array();
}

}  // namespace peerperf
