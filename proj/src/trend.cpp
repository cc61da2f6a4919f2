#include "peerperf/trend.hpp"

#include <algorithm>
#include <cmath>

#include "peerperf/errors.hpp"
#include "peerperf/hac.hpp"
#include "peerperf/ols.hpp"
#include "peerperf/rng.hpp"
#include "peerperf/stats.hpp"

namespace peerperf {

namespace {

constexpr int kMinMonths = 24;

double slope_pvalue(double slope, double se) {
    if (se > 0.0) return two_sided_p(slope / se);
    return std::fabs(slope) <= 1e-12 ? 1.0 : 0.0;
}

Eigen::MatrixXd trend_design(const RatioSeries& y,
                             const std::optional<RatioSeries>& control) {
    const auto t = static_cast<Eigen::Index>(y.values.size());
    if (t < kMinMonths) {
        throw InsufficientDataError("trend estimation needs at least " +
                                    std::to_string(kMinMonths) + " months, got " +
                                    std::to_string(t));
    }
    if (control) {
        if (control->months != y.months) {
            throw AlignmentError("control series months do not match");
        }
    }
    Eigen::MatrixXd x(t, control ? 3 : 2);
    for (Eigen::Index i = 0; i < t; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(i);  // months since series start
        if (control) x(i, 2) = control->values[static_cast<std::size_t>(i)];
    }
    return x;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
}

// Slope of an OLS refit; NaN when the resampled design is singular.
double refit_slope(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
    double check = (xtx * beta - X.transpose() * y).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, (X.transpose() * y).cwiseAbs().maxCoeff());
    if (!std::isfinite(beta[1]) || check > 1e-6 * scale) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return beta[1];
}

double bootstrap_sd(const std::vector<double>& slopes) {
    std::vector<double> ok;
    for (double s : slopes) {
        if (std::isfinite(s)) ok.push_back(s);
    }
    if (ok.size() < 2) throw OptimizationError("bootstrap produced no valid refits");
    double mean = 0.0;
    for (double s : ok) mean += s;
    mean /= static_cast<double>(ok.size());
    double ss = 0.0;
    for (double s : ok) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(ok.size() - 1));
}

// Flat-top (trapezoidal) lag window.
double flat_top(double x) {
    x = std::fabs(x);
    if (x <= 0.5) return 1.0;
    if (x <= 1.0) return 2.0 * (1.0 - x);
    return 0.0;
}

}  // namespace

std::string to_string(SeriesMetric m) {
    switch (m) {
        case SeriesMetric::heterogeneity: return "heterogeneity";
        case SeriesMetric::pi_minus: return "pi_minus";
        case SeriesMetric::pi_plus: return "pi_plus";
    }
    return "?";
}

SeriesMetric series_metric_from_string(const std::string& s) {
    if (s == "heterogeneity") return SeriesMetric::heterogeneity;
    if (s == "pi_minus") return SeriesMetric::pi_minus;
    if (s == "pi_plus") return SeriesMetric::pi_plus;
    throw ValidationError("unknown metric '" + s +
                          "' (expected heterogeneity, pi_minus, or pi_plus)");
}

std::string to_string(TrendSe s) {
    switch (s) {
        case TrendSe::hac: return "hac";
        case TrendSe::hansen_hodrick: return "hansen_hodrick";
        case TrendSe::stationary_bootstrap: return "stationary_bootstrap";
        case TrendSe::block_bootstrap: return "block_bootstrap";
        case TrendSe::beta_regression: return "beta_regression";
    }
    return "?";
}

double hansen_hodrick_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                         int max_lag, bool* fallback) {
    Eigen::MatrixXd scores = regression_scores(X, residuals);
    Eigen::MatrixXd lrv = truncated_lrv_matrix(scores, max_lag, false);
    Eigen::MatrixXd cov = sandwich_cov(X, lrv);
    double var = cov(1, 1);
    bool fell_back = false;
    if (var < 0.0) {
        lrv = truncated_lrv_matrix(scores, max_lag, true);
        cov = sandwich_cov(X, lrv);
        var = cov(1, 1);
        fell_back = true;
    }
    if (fallback) *fallback = fell_back;
    return std::sqrt(std::max(0.0, var));
}

double politis_white_block_length(const Eigen::VectorXd& v) {
    const Eigen::Index t = v.size();
    if (t < 8) return 1.0;
    const double tn = static_cast<double>(t);
    const double mean = v.mean();

    auto autocov = [&](int k) {
        double s = 0.0;
        for (Eigen::Index i = k; i < t; ++i) {
            s += (v[i] - mean) * (v[i - k] - mean);
        }
        return s / tn;
    };

    const double r0 = autocov(0);
    if (r0 <= 0.0) return 1.0;

    const int kn = std::max(5, static_cast<int>(std::ceil(std::sqrt(std::log10(tn)))));
    const int mmax = static_cast<int>(std::ceil(std::sqrt(tn))) + kn;
    const double thresh = 2.0 * std::sqrt(std::log10(tn) / tn);

    std::vector<double> rho(static_cast<std::size_t>(mmax + kn) + 1);
    for (int k = 0; k <= mmax + kn; ++k) {
        rho[static_cast<std::size_t>(k)] = k < t ? autocov(k) / r0 : 0.0;
    }

    int mhat = -1;
    for (int m = 1; m <= mmax; ++m) {
        bool small = true;
        for (int j = 1; j <= kn; ++j) {
            if (std::fabs(rho[static_cast<std::size_t>(m + j)]) >= thresh) {
                small = false;
                break;
            }
        }
        if (small) {
            mhat = m;
            break;
        }
    }
    if (mhat < 0) mhat = mmax;
    const int big_m = std::min(2 * mhat, mmax);

    double g = 0.0, g0 = 0.0;
    for (int k = -big_m; k <= big_m; ++k) {
        double w = big_m > 0 ? flat_top(static_cast<double>(k) /
                                        static_cast<double>(big_m))
                             : 1.0;
        double r = autocov(std::abs(k));
        g += w * std::fabs(static_cast<double>(k)) * r;
        g0 += w * r;
    }
    const double d_sb = 2.0 * g0 * g0;
    if (d_sb <= 0.0 || g == 0.0) return 1.0;

    double b = std::cbrt(2.0 * g * g / d_sb) * std::cbrt(tn);
    b = std::clamp(b, 1.0, std::min(3.0 * std::sqrt(tn), tn / 3.0));
    return b;
}

double stationary_bootstrap_se(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                               double expected_block_length, int reps,
                               std::uint64_t seed) {
    const Eigen::Index t = y.size();
    if (t < kMinMonths) {
        throw InsufficientDataError("stationary bootstrap needs at least " +
                                    std::to_string(kMinMonths) + " observations");
    }
    double ell = expected_block_length;
    if (ell <= 0.0) {
        OlsFit fit = ols_fit(y, X);
        Eigen::VectorXd scores = X.col(1).cwiseProduct(fit.residuals);
        ell = politis_white_block_length(scores);
    }
    ell = std::max(1.0, ell);
    const double restart_prob = 1.0 / ell;

    std::vector<double> slopes(static_cast<std::size_t>(reps));
    Eigen::VectorXd yb(t);
    Eigen::MatrixXd xb(t, X.cols());
    for (int b = 0; b < reps; ++b) {
        CounterRng rng(CounterRng::derive_key(seed, {0x5b, static_cast<std::uint64_t>(b)}));
        Eigen::Index idx = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(t)));
        for (Eigen::Index i = 0; i < t; ++i) {
            if (i > 0) {
                if (rng.uniform() < restart_prob) {
                    idx = static_cast<Eigen::Index>(
                        rng.uniform_below(static_cast<std::uint64_t>(t)));
                } else {
                    idx = (idx + 1) % t;
                }
            }
            yb[i] = y[idx];
            xb.row(i) = X.row(idx);
        }
        slopes[static_cast<std::size_t>(b)] = refit_slope(yb, xb);
    }
    return bootstrap_sd(slopes);
}

double block_bootstrap_se(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                          int block_length, int reps, std::uint64_t seed) {
    const Eigen::Index t = y.size();
    if (block_length < 1 || block_length > t) {
        throw DomainError("block length must be in [1, T]");
    }
    std::vector<double> slopes(static_cast<std::size_t>(reps));
    Eigen::VectorXd yb(t);
    Eigen::MatrixXd xb(t, X.cols());
    for (int b = 0; b < reps; ++b) {
        CounterRng rng(CounterRng::derive_key(seed, {0xb1, static_cast<std::uint64_t>(b)}));
        Eigen::Index filled = 0;
        while (filled < t) {
            Eigen::Index start = static_cast<Eigen::Index>(
                rng.uniform_below(static_cast<std::uint64_t>(t)));
            for (int j = 0; j < block_length && filled < t; ++j, ++filled) {
                Eigen::Index idx = (start + j) % t;  // circular blocks
                yb[filled] = y[idx];
                xb.row(filled) = X.row(idx);
            }
        }
        slopes[static_cast<std::size_t>(b)] = refit_slope(yb, xb);
    }
    return bootstrap_sd(slopes);
}

TrendResult linear_trend(const RatioSeries& y,
                         const std::optional<RatioSeries>& control,
                         const TrendOptions& opts) {
    Eigen::MatrixXd x = trend_design(y, control);
    Eigen::VectorXd yv = to_vector(y.values);
    OlsFit fit = ols_fit(yv, x);

    TrendResult out;
    out.estimator = opts.se;
    out.with_control = control.has_value();
    out.slope = fit.coef[1];

    // Exact fits leave only rounding noise in the residuals; inference on that
    // noise is meaningless, so report the fit as degenerate directly.
    double y_scale = yv.cwiseAbs().maxCoeff();
    double resid_rms = std::sqrt(fit.residuals.squaredNorm() /
                                 static_cast<double>(fit.residuals.size()));
    if (resid_rms <= 1e-12 * std::max(1.0, y_scale)) {
        out.se = 0.0;
        out.p_value = std::fabs(out.slope) <= 1e-12 ? 1.0 : 0.0;
        return out;
    }

    switch (opts.se) {
        case TrendSe::hac: {
            Eigen::MatrixXd scores = regression_scores(x, fit.residuals);
            Eigen::MatrixXd cov = sandwich_cov(x, hac_lrv_matrix(scores, true));
            out.se = std::sqrt(std::max(0.0, cov(1, 1)));
            break;
        }
        case TrendSe::hansen_hodrick: {
            bool fb = false;
            out.se = hansen_hodrick_se(x, fit.residuals, opts.hh_lag, &fb);
            out.fallback_used = fb;
            break;
        }
        case TrendSe::stationary_bootstrap:
            out.se = stationary_bootstrap_se(yv, x, opts.block_length, opts.bootstrap_reps,
                                             opts.seed);
            break;
        case TrendSe::block_bootstrap:
            out.se = block_bootstrap_se(yv, x, opts.block_length, opts.bootstrap_reps,
                                        opts.seed);
            out.block_length = opts.block_length;
            break;
        case TrendSe::beta_regression:
            return beta_regression_trend(y, control);
    }
    out.p_value = slope_pvalue(out.slope, out.se);
    return out;
}

double beta_regression_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& beta, double log_phi) {
    const double phi = std::exp(log_phi);
    Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        const double mu = 1.0 / (1.0 + std::exp(-eta[t]));
        ll += std::lgamma(phi) - std::lgamma(mu * phi) - std::lgamma((1.0 - mu) * phi) +
              (mu * phi - 1.0) * std::log(y[t]) +
              ((1.0 - mu) * phi - 1.0) * std::log1p(-y[t]);
    }
    return ll;
}

Eigen::VectorXd beta_regression_gradient(const Eigen::VectorXd& y,
                                         const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& beta, double log_phi) {
    const double phi = std::exp(log_phi);
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(beta.size() + 1);
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        const double mu = 1.0 / (1.0 + std::exp(-eta[t]));
        const double ystar = std::log(y[t]) - std::log1p(-y[t]);
        const double mustar = digamma(mu * phi) - digamma((1.0 - mu) * phi);
        const double dmu = mu * (1.0 - mu);
        grad.head(beta.size()) += phi * (ystar - mustar) * dmu * X.row(t).transpose();
        const double dphi = digamma(phi) - mu * digamma(mu * phi) -
                            (1.0 - mu) * digamma((1.0 - mu) * phi) +
                            mu * std::log(y[t]) + (1.0 - mu) * std::log1p(-y[t]);
        grad[beta.size()] += dphi * phi;  // chain rule for log phi
    }
    return grad;
}

BetaRegressionFit beta_regression_fit(const Eigen::VectorXd& y_in,
                                      const Eigen::MatrixXd& X_in, int max_iter,
                                      double grad_tol) {
    const Eigen::Index t = y_in.size();
    if (t < kMinMonths) {
        throw InsufficientDataError("beta regression needs at least " +
                                    std::to_string(kMinMonths) + " observations");
    }

    BetaRegressionFit out;
    Eigen::VectorXd y = y_in;
    if (y.minCoeff() <= 0.0 || y.maxCoeff() >= 1.0) {
        const double tn = static_cast<double>(t);
        y = (y_in.array() * (tn - 1.0) + 0.5) / tn;  // boundary shrinkage
        out.boundary_shrunk = true;
    }

    // Optimize on column-scaled regressors; a raw time index spanning dozens
    // of months makes the likelihood badly conditioned for quasi-Newton steps.
    Eigen::VectorXd col_scale(X_in.cols());
    for (Eigen::Index j = 0; j < X_in.cols(); ++j) {
        col_scale[j] = std::max(1.0, X_in.col(j).cwiseAbs().maxCoeff());
    }
    Eigen::MatrixXd X = X_in * col_scale.cwiseInverse().asDiagonal();

    // OLS on the logit scale for starting values.
    Eigen::VectorXd logit_y(t);
    for (Eigen::Index i = 0; i < t; ++i) {
        logit_y[i] = std::log(y[i]) - std::log1p(-y[i]);
    }
    OlsFit init = ols_fit(logit_y, X);
    double sigma2 = init.residuals.squaredNorm() /
                    static_cast<double>(t - X.cols());
    double phi_init = 1.0;
    {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < t; ++i) {
            double mu = 1.0 / (1.0 + std::exp(-(X.row(i) * init.coef)(0)));
            acc += 1.0 / std::max(1e-12, sigma2 * mu * (1.0 - mu));
        }
        phi_init = std::max(0.1, acc / static_cast<double>(t) - 1.0);
    }

    const Eigen::Index np = X.cols() + 1;
    Eigen::VectorXd theta(np);
    theta.head(X.cols()) = init.coef;
    theta[np - 1] = std::log(phi_init);

    auto loglik = [&](const Eigen::VectorXd& th) {
        return beta_regression_loglik(y, X, th.head(X.cols()), th[np - 1]);
    };
    auto gradient = [&](const Eigen::VectorXd& th) {
        return beta_regression_gradient(y, X, th.head(X.cols()), th[np - 1]);
    };

    // BFGS ascent with backtracking line search.
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(np, np);
    double f = loglik(theta);
    Eigen::VectorXd g = gradient(theta);
    int iter = 0;
    bool converged = g.cwiseAbs().maxCoeff() < grad_tol;
    while (!converged && iter < max_iter) {
        ++iter;
        Eigen::VectorXd dir = h_inv * g;
        if (dir.dot(g) <= 0.0) {
            h_inv.setIdentity();
            dir = g;
        }
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd theta_new = theta;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            theta_new = theta + step * dir;
            f_new = loglik(theta_new);
            if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * g.dot(dir)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd g_new = gradient(theta_new);
        Eigen::VectorXd s = theta_new - theta;
        Eigen::VectorXd yk = g - g_new;  // gradient of -ll increases
        double sy = s.dot(yk);
        if (sy > 1e-12) {
            Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(np, np);
            h_inv = (eye - s * yk.transpose() / sy) * h_inv *
                        (eye - yk * s.transpose() / sy) +
                    s * s.transpose() / sy;
        }
        theta = theta_new;
        f = f_new;
        g = g_new;
        converged = g.cwiseAbs().maxCoeff() < grad_tol;
    }
    // The likelihood scale grows with T, so accept a stalled line search whose
    // gradient is negligible relative to that scale.
    if (!converged &&
        g.cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, std::fabs(f))) {
        converged = true;
    }
    if (!converged) {
        throw OptimizationError(
            "beta regression did not converge after " + std::to_string(iter) +
            " iterations (gradient max-norm " + std::to_string(g.cwiseAbs().maxCoeff()) +
            ", last slope iterate " + std::to_string(theta[1]) + ")");
    }

    // Observed information from central differences of the analytic gradient.
    Eigen::MatrixXd hess(np, np);
    for (Eigen::Index j = 0; j < np; ++j) {
        double h = 1e-5 * std::max(1.0, std::fabs(theta[j]));
        Eigen::VectorXd tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        hess.col(j) = (gradient(tp) - gradient(tm)) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose().eval());
    Eigen::MatrixXd info_inv =
        (-hess).ldlt().solve(Eigen::MatrixXd::Identity(np, np));

    out.coef = theta.head(X.cols()).cwiseQuotient(col_scale);
    out.phi = std::exp(theta[np - 1]);
    out.se.resize(np);
    for (Eigen::Index j = 0; j < np; ++j) {
        out.se[j] = std::sqrt(std::max(0.0, info_inv(j, j)));
        if (j < X.cols()) out.se[j] /= col_scale[j];
    }
    out.log_likelihood = f;
    out.iterations = iter;
    return out;
}

TrendResult beta_regression_trend(const RatioSeries& y,
                                  const std::optional<RatioSeries>& control) {
    Eigen::MatrixXd x = trend_design(y, control);
    Eigen::VectorXd yv = to_vector(y.values);
    BetaRegressionFit fit = beta_regression_fit(yv, x);

    TrendResult out;
    out.estimator = TrendSe::beta_regression;
    out.with_control = control.has_value();
    out.slope = fit.coef[1];
    out.se = fit.se[1];
    out.p_value = slope_pvalue(out.slope, out.se);
    out.fallback_used = fit.boundary_shrunk;
    return out;
}

TrendResult trend_difference(const RatioSeries& a, const RatioSeries& b) {
    if (a.months != b.months) throw AlignmentError("series months do not match");
    const auto t = static_cast<Eigen::Index>(a.values.size());
    Eigen::VectorXd y(2 * t);
    Eigen::MatrixXd x(2 * t, 4);
    for (Eigen::Index i = 0; i < t; ++i) {
        double tt = static_cast<double>(i);
        y[i] = a.values[static_cast<std::size_t>(i)];
        x.row(i) << 1.0, tt, 0.0, 0.0;
        y[t + i] = b.values[static_cast<std::size_t>(i)];
        x.row(t + i) << 1.0, tt, 1.0, tt;
    }
    OlsFit fit = ols_fit(y, x);
    Eigen::MatrixXd scores = regression_scores(x, fit.residuals);
    Eigen::MatrixXd cov = sandwich_cov(x, hac_lrv_matrix(scores, true));

    TrendResult out;
    out.estimator = TrendSe::hac;
    out.slope = fit.coef[3];  // trend difference b - a
    out.se = std::sqrt(std::max(0.0, cov(3, 3)));
    out.p_value = slope_pvalue(out.slope, out.se);
    return out;
}

std::string significance_stars(double p_value) {
    if (p_value <= 0.01) return "***";
    if (p_value <= 0.05) return "**";
    if (p_value <= 0.10) return "*";
    return "";
}

std::vector<SeriesSummary> summarize_series(const std::vector<RatioSeries>& series) {
    if (series.empty()) throw InsufficientDataError("no series to summarize");

    auto find_control = [&](const RatioSeries& s) -> std::optional<RatioSeries> {
        if (s.group == "neutral") return std::nullopt;
        for (const auto& c : series) {
            if (c.group == "neutral" && c.horizon == s.horizon && c.model == s.model &&
                c.metric == s.metric && c.months == s.months) {
                return c;
            }
        }
        return std::nullopt;
    };

    std::vector<SeriesSummary> out;
    for (const auto& s : series) {
        SeriesSummary row;
        row.group = s.group;
        row.horizon = s.horizon;
        row.metric = s.metric;
        row.model = s.model;
        row.n_months = s.values.size();

        double mean = 0.0;
        double lo = s.values.empty() ? 0.0 : s.values.front();
        double hi = lo;
        for (double v : s.values) {
            mean += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        mean /= static_cast<double>(s.values.size());
        double ss = 0.0;
        for (double v : s.values) ss += (v - mean) * (v - mean);
        double sd = s.values.size() > 1
                        ? std::sqrt(ss / static_cast<double>(s.values.size() - 1))
                        : 0.0;
        row.average = mean * 100.0;
        row.sd = sd * 100.0;
        row.minimum = lo * 100.0;
        row.maximum = hi * 100.0;

        // Trend rows only when the series is long enough to estimate one.
        if (s.values.size() >= static_cast<std::size_t>(kMinMonths)) {
            std::optional<RatioSeries> control = find_control(s);
            row.trend = linear_trend(s, std::nullopt);
            row.trend_with_control = linear_trend(s, control);
            row.trend_beta = beta_regression_trend(s, control);
            row.trend_stars = significance_stars(row.trend.p_value);
            row.trend_with_control_stars =
                significance_stars(row.trend_with_control.p_value);
            row.trend_beta_stars = significance_stars(row.trend_beta.p_value);
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace peerperf
