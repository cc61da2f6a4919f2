#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peerperf/dates.hpp"

namespace peerperf {

enum class SeriesMetric { heterogeneity, pi_minus, pi_plus };

std::string to_string(SeriesMetric m);
SeriesMetric series_metric_from_string(const std::string& s);

struct RatioSeries {
    std::vector<Month> months;
    std::vector<double> values;  // in [0,1]
    std::string group;           // "green", "brown", "neutral"
    int horizon = 3;
    SeriesMetric metric = SeriesMetric::heterogeneity;
    std::string model;
};

enum class TrendSe {
    hac,
    hansen_hodrick,
    stationary_bootstrap,
    block_bootstrap,
    beta_regression,
};

std::string to_string(TrendSe s);

struct TrendResult {
    double slope = 0.0;  // per month
    double se = 0.0;
    double p_value = 1.0;
    TrendSe estimator = TrendSe::hac;
    bool with_control = false;
    int block_length = 0;      // block_bootstrap only
    bool fallback_used = false;  // Hansen-Hodrick Bartlett fallback / boundary shrink
};

struct TrendOptions {
    TrendSe se = TrendSe::hac;
    int hh_lag = 11;              // Hansen-Hodrick truncation
    int block_length = 0;         // 0 = automatic (stationary bootstrap only)
    int bootstrap_reps = 2000;
    std::uint64_t seed = 1;
};

// OLS of the ratio series on (1, t, [control]) with the selected slope SE.
TrendResult linear_trend(const RatioSeries& y,
                         const std::optional<RatioSeries>& control,
                         const TrendOptions& opts = {});

// Slope standard error with uniform kernel weights on lags 0..max_lag; falls
// back to Bartlett weights when the truncated variance goes negative.
double hansen_hodrick_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                         int max_lag, bool* fallback = nullptr);

double stationary_bootstrap_se(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                               double expected_block_length,  // <= 0 selects automatically
                               int reps, std::uint64_t seed);

double block_bootstrap_se(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                          int block_length, int reps, std::uint64_t seed);

// Automatic expected block length for the stationary bootstrap (Politis-White
// rule applied to the slope score series).
double politis_white_block_length(const Eigen::VectorXd& v);

struct BetaRegressionFit {
    Eigen::VectorXd coef;   // mean-model coefficients on the logit scale
    double phi = 0.0;       // precision
    Eigen::VectorXd se;     // from the inverse observed information
    double log_likelihood = 0.0;
    int iterations = 0;
    bool boundary_shrunk = false;
};

// Beta regression with logit mean link and constant precision, fitted by
// quasi-Newton maximum likelihood from an OLS-on-logit start.
BetaRegressionFit beta_regression_fit(const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& X,
                                      int max_iter = 500, double grad_tol = 1e-8);

// Analytic gradient of the beta-regression log-likelihood at (beta, log phi);
// exposed for finite-difference verification.
Eigen::VectorXd beta_regression_gradient(const Eigen::VectorXd& y,
                                         const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& beta, double log_phi);
double beta_regression_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& beta, double log_phi);

// Trend via beta regression; slope is the time coefficient on the logit scale.
TrendResult beta_regression_trend(const RatioSeries& y,
                                  const std::optional<RatioSeries>& control);

// Slope difference between two aligned series, tested on the stacked
// regression with a group interaction and HAC standard errors.
TrendResult trend_difference(const RatioSeries& a, const RatioSeries& b);

struct SeriesSummary {
    std::string group;
    int horizon = 3;
    SeriesMetric metric = SeriesMetric::heterogeneity;
    std::string model;
    std::size_t n_months = 0;
    double average = 0.0;   // percent
    double sd = 0.0;        // percent, sample convention
    double minimum = 0.0;   // percent
    double maximum = 0.0;   // percent
    TrendResult trend;                 // x1000 applied at rendering
    TrendResult trend_with_control;
    TrendResult trend_beta;
    std::string trend_stars;
    std::string trend_with_control_stars;
    std::string trend_beta_stars;
};

std::string significance_stars(double p_value);

// Full summary row set for a collection of series; the neutral series of the
// matching (horizon, model, metric) provides the trend control.
std::vector<SeriesSummary> summarize_series(const std::vector<RatioSeries>& series);

}  // namespace peerperf
