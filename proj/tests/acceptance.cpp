// End-to-end acceptance suite. Each check prints a single pass/fail line; the
// process exit code is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "peerperf/errors.hpp"
#include "peerperf/hac.hpp"
#include "peerperf/ols.hpp"
#include "peerperf/pairwise.hpp"
#include "peerperf/pipeline.hpp"
#include "peerperf/ratios.hpp"
#include "peerperf/rng.hpp"
#include "peerperf/stats.hpp"
#include "peerperf/svg.hpp"
#include "peerperf/synth.hpp"
#include "peerperf/trend.hpp"
#include "test_util.hpp"

using namespace peerperf;

namespace {

std::string g_detail;

void detail(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    g_detail = buf;
}

// ---------------------------------------------------------------------------
// 1. Triple closure over randomized evidence.
bool check_triple_closure() {
    CounterRng rng(CounterRng::derive_key(1001, {1}));
    double worst = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        std::size_t n = 10 + rng.uniform_below(31);
        PairEvidence ev;
        for (std::size_t i = 0; i < n; ++i) {
            double u = rng.uniform();
            ev.p_values.push_back(rng.uniform() < 0.3 ? 0.05 * u : u);
            double s = rng.uniform();
            ev.signs.push_back(s < 0.45 ? -1 : (s < 0.9 ? 1 : 0));
        }
        RatioTriple t = stock_ratio_triple(ev, rng.next_u64());
        double gap = std::fabs(t.pi0 + t.pi_minus + t.pi_plus - 1.0);
        worst = std::max(worst, gap);
        if (gap > 1e-12 || t.pi0 < 0 || t.pi0 > 1 || t.pi_minus < 0 ||
            t.pi_minus > 1 || t.pi_plus < 0 || t.pi_plus > 1) {
            detail("closure gap %.3e at rep %d", gap, rep);
            return false;
        }
    }
    detail("10000 triples, worst closure gap %.3e", worst);
    return true;
}

// Shared helper: all pairwise tests of one firm universe over the full panel.
std::vector<PairTest> universe_tests(const SimPanel& panel) {
    std::vector<std::size_t> members(panel.returns.firm_ids.size());
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
    EvalWindow w{0, panel.returns.calendar.size() - 1,
                 static_cast<int>(panel.returns.calendar.size())};
    return group_pair_tests(panel.returns, panel.factors.factors, members, w, 60,
                            Execution::parallel);
}

std::vector<RatioTriple> universe_triples(const SimPanel& panel,
                                          const std::vector<PairTest>& tests,
                                          std::uint64_t seed) {
    std::size_t n = panel.returns.firm_ids.size();
    std::vector<std::uint64_t> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back(CounterRng::derive_key(seed, {i}));
    return group_ratio_triples(tests, n, keys, 0.10, default_lambda_grid(),
                               Execution::parallel);
}

// ---------------------------------------------------------------------------
// 2. Null calibration: heterogeneity near zero and uniform p-values.
bool check_null_calibration() {
    const int seeds = 50;
    const std::size_t n_firms = 40;
    double het_acc = 0.0;
    int ks_pass = 0;
    std::vector<double> pooled;
    for (int s = 0; s < seeds; ++s) {
        SimSpec spec;
        spec.n_firms = static_cast<int>(n_firms);
        spec.n_days = 252;
        spec.seed = 2000 + static_cast<std::uint64_t>(s);
        SimPanel panel = simulate_panel(spec);
        auto tests = universe_tests(panel);
        auto triples = universe_triples(panel, tests, spec.seed);
        AggregateRatios agg = aggregate_ratios(triples);
        het_acc += agg.heterogeneity;

        // The KS critical value assumes an independent sample, so the
        // uniformity check uses the disjoint pairs (0,1), (2,3), ... whose
        // p-values are mutually independent; pairs sharing a firm are not.
        std::vector<double> pvals;
        std::size_t idx = 0;
        for (std::size_t a = 0; a < n_firms; ++a) {
            for (std::size_t b = a + 1; b < n_firms; ++b, ++idx) {
                if (b == a + 1 && a % 2 == 0) pvals.push_back(tests[idx].p_value);
            }
        }
        pooled.insert(pooled.end(), pvals.begin(), pvals.end());
        double d = ks_uniform_statistic(pvals);
        if (d < 1.63 / std::sqrt(static_cast<double>(pvals.size()))) ++ks_pass;
    }
    double het = het_acc / seeds;
    // Pooled disjoint-pair p-values across all seeds give a high-power
    // uniformity check (n = 1000 independent draws).
    double pooled_d = ks_uniform_statistic(pooled);
    double pooled_crit = 1.63 / std::sqrt(static_cast<double>(pooled.size()));
    detail("mean heterogeneity %.4f (need <= 0.15), KS pass %d/%d (need >= 45), "
           "pooled KS %.4f (crit %.4f)",
           het, ks_pass, seeds, pooled_d, pooled_crit);
    return het <= 0.15 && ks_pass >= 45 && pooled_d < pooled_crit;
}

// ---------------------------------------------------------------------------
// 3. Planted-alpha recovery of group-mean directional ratios.
bool check_planted_recovery() {
    const int seeds = 50;
    double est_minus = 0.0, est_plus = 0.0, ora_minus = 0.0, ora_plus = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SimSpec spec;
        spec.n_firms = 40;
        spec.n_days = 504;
        spec.frac_zero = 0.6;
        spec.frac_negative = 0.3;
        spec.frac_positive = 0.1;
        spec.residual_vol = 0.004;  // 8 bp/day alpha gives |t| near 3
        spec.seed = 3000 + static_cast<std::uint64_t>(s);
        SimPanel panel = simulate_panel(spec);
        auto tests = universe_tests(panel);
        auto triples = universe_triples(panel, tests, spec.seed);
        AggregateRatios agg = aggregate_ratios(triples);
        est_minus += agg.pi_minus;
        est_plus += agg.pi_plus;

        double om = 0.0, op = 0.0;
        for (std::size_t i = 0; i < panel.truth.alphas.size(); ++i) {
            RatioTriple t = brute_force_triple(panel.truth, i);
            om += t.pi_minus;
            op += t.pi_plus;
        }
        ora_minus += om / static_cast<double>(panel.truth.alphas.size());
        ora_plus += op / static_cast<double>(panel.truth.alphas.size());
    }
    est_minus /= seeds;
    est_plus /= seeds;
    ora_minus /= seeds;
    ora_plus /= seeds;
    detail("pi_minus %.3f vs oracle %.3f, pi_plus %.3f vs oracle %.3f (tol 0.10)",
           est_minus, ora_minus, est_plus, ora_plus);
    return std::fabs(est_minus - ora_minus) <= 0.10 &&
           std::fabs(est_plus - ora_plus) <= 0.10;
}

// ---------------------------------------------------------------------------
// 4. Long-run variance oracle on iid and AR(1) scores.
bool check_hac_oracle() {
    const int seeds = 20;
    const int t = 100000;
    double iid_acc = 0.0, ar_acc = 0.0;
    for (int s = 0; s < seeds; ++s) {
        CounterRng rng(CounterRng::derive_key(4000, {static_cast<std::uint64_t>(s)}));
        Eigen::VectorXd iid(t), ar(t);
        double prev = 0.0;
        for (int i = 0; i < t; ++i) {
            double z = rng.normal();
            iid[i] = z;
            prev = 0.5 * prev + rng.normal();
            ar[i] = prev;
        }
        iid.array() -= iid.mean();
        ar.array() -= ar.mean();
        iid_acc += hac_lrv(iid, true);
        ar_acc += hac_lrv(ar, true);
    }
    double iid_mean = iid_acc / seeds;
    double ar_mean = ar_acc / seeds;
    detail("iid LRV %.4f (target 1.0), AR(1) LRV %.4f (target 4.0), tol 5%%",
           iid_mean, ar_mean);
    return std::fabs(iid_mean - 1.0) <= 0.05 && std::fabs(ar_mean - 4.0) <= 0.20;
}

// ---------------------------------------------------------------------------
// 5. OLS against an extended-precision normal-equations oracle.
bool check_ols_oracle() {
    using LdMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LdVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    CounterRng rng(CounterRng::derive_key(5000, {1}));
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        int t = 30 + static_cast<int>(rng.uniform_below(171));
        int k = 1 + static_cast<int>(rng.uniform_below(5));
        Eigen::MatrixXd x(t, k + 1);
        Eigen::VectorXd y(t);
        for (int i = 0; i < t; ++i) {
            x(i, 0) = 1.0;
            for (int j = 1; j <= k; ++j) x(i, j) = rng.normal();
            y[i] = rng.normal();
        }
        OlsFit fit = ols_fit(y, x);
        LdMat xl = x.cast<long double>();
        LdVec yl = y.cast<long double>();
        LdVec oracle = Eigen::FullPivLU<LdMat>(xl.transpose() * xl)
                           .solve(xl.transpose() * yl);
        double err = (fit.coef - oracle.cast<double>()).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
        if (err > 1e-8) {
            detail("coefficient gap %.3e at rep %d", err, rep);
            return false;
        }
    }
    detail("1000 designs, worst coefficient gap %.3e (tol 1e-8)", worst);
    return true;
}

// ---------------------------------------------------------------------------
// 6. Size of the HAC trend test on zero-slope AR(1) series.
bool check_trend_size() {
    const int reps = 1000;
    const int t = 81;
    int rejections = 0;
    for (int r = 0; r < reps; ++r) {
        CounterRng rng(CounterRng::derive_key(6000, {static_cast<std::uint64_t>(r)}));
        RatioSeries s;
        Month m(2014, 1);
        double prev = 0.0;
        for (int i = 0; i < t; ++i) {
            prev = 0.5 * prev + rng.normal();
            s.months.push_back(m);
            s.values.push_back(0.5 + 0.05 * prev);
            ++m;
        }
        TrendResult res = linear_trend(s, std::nullopt);
        if (res.p_value < 0.05) ++rejections;
    }
    double rate = static_cast<double>(rejections) / reps;
    detail("rejection rate %.3f at the 5%% level (need within [0.02, 0.09])", rate);
    return rate >= 0.02 && rate <= 0.09;
}

// ---------------------------------------------------------------------------
// 7. Beta regression: recovery and gradient verification.
double gamma_draw(CounterRng& rng, double shape) {
    // Marsaglia-Tsang; shape is always >= 1 for the precisions used here.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double beta_draw(CounterRng& rng, double a, double b) {
    double x = gamma_draw(rng, a);
    double y = gamma_draw(rng, b);
    return x / (x + y);
}

bool check_beta_regression() {
    const int seeds = 100;
    const int t = 5000;
    const double b0 = -0.5, b1 = 0.8, phi = 50.0;
    int recovered = 0;
    for (int s = 0; s < seeds; ++s) {
        CounterRng rng(CounterRng::derive_key(7000, {static_cast<std::uint64_t>(s)}));
        Eigen::MatrixXd x(t, 2);
        Eigen::VectorXd y(t);
        for (int i = 0; i < t; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = static_cast<double>(i) / t;
            double mu = 1.0 / (1.0 + std::exp(-(b0 + b1 * x(i, 1))));
            y[i] = beta_draw(rng, mu * phi, (1.0 - mu) * phi);
        }
        try {
            BetaRegressionFit fit = beta_regression_fit(y, x);
            bool ok = std::fabs(fit.coef[0] - b0) <= 3.0 * fit.se[0] &&
                      std::fabs(fit.coef[1] - b1) <= 3.0 * fit.se[1];
            if (ok) ++recovered;
        } catch (const std::exception&) {
        }
    }

    // Gradient verification at random points.
    CounterRng rng(CounterRng::derive_key(7001, {1}));
    double worst_rel = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 50;
        Eigen::MatrixXd x(n, 2);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = rng.normal();
            y[i] = 0.05 + 0.9 * rng.uniform();
        }
        Eigen::VectorXd beta(2);
        beta << rng.normal() * 0.5, rng.normal() * 0.5;
        double log_phi = std::log(5.0 + 50.0 * rng.uniform());
        Eigen::VectorXd g = beta_regression_gradient(y, x, beta, log_phi);
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6;
            Eigen::VectorXd bp = beta, bm = beta;
            double lp = log_phi, lm = log_phi;
            if (j < 2) {
                bp[j] += h;
                bm[j] -= h;
            } else {
                lp += h;
                lm -= h;
            }
            double fd = (beta_regression_loglik(y, x, bp, lp) -
                         beta_regression_loglik(y, x, bm, lm)) /
                        (2.0 * h);
            double rel = std::fabs(g[j] - fd) / std::max(1.0, std::fabs(fd));
            worst_rel = std::max(worst_rel, rel);
        }
    }
    detail("recovery %d/%d within 3 SEs (need >= 95), worst gradient rel err %.2e "
           "(tol 1e-4)",
           recovered, seeds, worst_rel);
    return recovered >= 95 && worst_rel <= 1e-4;
}

// ---------------------------------------------------------------------------
// 8. Evaluation-date counts on a 2014-2020 weekday calendar.
bool check_date_span() {
    TradingCalendar cal = TradingCalendar::weekdays(Date{2014, 1, 1}, Date{2020, 12, 31});
    std::map<int, int> counts;
    for (int h : {3, 6, 12}) {
        int n = 0;
        for (Month m(2014, 1); m <= Month(2020, 12); ++m) {
            try {
                evaluation_window(m, h, cal);
                ++n;
            } catch (const CoverageError&) {
                break;
            }
        }
        counts[h] = n;
    }
    detail("evaluation dates h=3: %d (want 81), h=6: %d (want 79), h=12: %d (want 72)",
           counts[3], counts[6], counts[12]);
    return counts[3] == 81 && counts[6] == 79 && counts[12] == 72;
}

// ---------------------------------------------------------------------------
// 9. Byte-identical outputs across worker counts.
bool check_determinism() {
    SimSpec spec;
    spec.n_firms = 60;
    spec.n_days = 218;
    spec.frac_zero = 0.6;
    spec.frac_negative = 0.2;
    spec.frac_positive = 0.2;
    spec.seed = 9;
    SimPanel panel = simulate_panel(spec);
    std::map<FactorModel, FactorPanel> factors;
    factors[FactorModel::carhart4] = panel.factors;

    testutil::TempDir tmp("acc9");
    std::vector<std::string> ratios, summaries, svgs;
    for (int threads : {1, 4, 16}) {
        RunConfig c;
        c.start = Month(2014, 1);
        c.end = Month(2014, 12);
        c.threads = threads;
        BacktestResult res =
            run_backtest(c, panel.returns, factors, panel.emissions, Execution::parallel);
        std::string tag = std::to_string(threads);
        write_ratios_csv(res.rows, tmp.path("ratios_" + tag + ".csv"));
        write_summary_csv(summarize_series(res.series), tmp.path("summary_" + tag + ".csv"));
        for (const auto& s : res.series) {
            if (s.group == "brown" && s.metric == SeriesMetric::heterogeneity) {
                write_ratio_svg(s, "brown heterogeneity", tmp.path("plot_" + tag + ".svg"));
            }
        }
        ratios.push_back(testutil::slurp(tmp.path("ratios_" + tag + ".csv")));
        summaries.push_back(testutil::slurp(tmp.path("summary_" + tag + ".csv")));
        svgs.push_back(testutil::slurp(tmp.path("plot_" + tag + ".svg")));
    }
    bool ok = ratios[0] == ratios[1] && ratios[1] == ratios[2] &&
              summaries[0] == summaries[1] && summaries[1] == summaries[2] &&
              svgs[0] == svgs[1] && svgs[1] == svgs[2] && !ratios[0].empty() &&
              !svgs[0].empty();
    detail("ratios/summary/svg identical across 1/4/16 workers: %s",
           ok ? "yes" : "no");
    return ok;
}

// ---------------------------------------------------------------------------
// 10. Pairwise antisymmetry and scale invariance.
bool check_pairwise_properties() {
    CounterRng rng(CounterRng::derive_key(10000, {1}));
    double worst_anti = 0.0, worst_scale = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int t = 120 + static_cast<int>(rng.uniform_below(180));
        Eigen::MatrixXd f(t, 4);
        Eigen::VectorXd ri(t), rj(t);
        for (int i = 0; i < t; ++i) {
            for (int j = 0; j < 4; ++j) f(i, j) = 0.008 * rng.normal();
            double common = f.row(i).sum();
            ri[i] = 0.0002 + common + 0.01 * rng.normal();
            rj[i] = common + 0.01 * rng.normal();
        }
        PairTest ab = pairwise_alpha_test(ri, rj, f, "A", "B");
        PairTest ba = pairwise_alpha_test(rj, ri, f, "B", "A");
        worst_anti = std::max({worst_anti, std::fabs(ab.t_stat + ba.t_stat),
                               std::fabs(ab.p_value - ba.p_value),
                               std::fabs(ab.delta_alpha + ba.delta_alpha)});

        const double c = 0.5 + 5.0 * rng.uniform();
        PairTest sc = pairwise_alpha_test(Eigen::VectorXd(c * ri),
                                          Eigen::VectorXd(c * rj), f, "A", "B");
        worst_scale = std::max(
            {worst_scale, std::fabs(sc.t_stat - ab.t_stat),
             std::fabs(sc.p_value - ab.p_value),
             std::fabs(sc.delta_alpha - c * ab.delta_alpha) / std::fabs(c)});
        if (worst_anti > 1e-10 || worst_scale > 1e-8) {
            detail("antisymmetry gap %.3e, scale gap %.3e at rep %d", worst_anti,
                   worst_scale, rep);
            return false;
        }
    }
    detail("1000 pairs, worst antisymmetry gap %.3e, worst scale gap %.3e",
           worst_anti, worst_scale);
    return true;
}

}  // namespace

int main() {
    struct Check {
        int id;
        const char* name;
        std::function<bool()> fn;
    };
    const std::vector<Check> checks = {
        {1, "triple closure over randomized evidence", check_triple_closure},
        {2, "null calibration (heterogeneity and p-value uniformity)",
         check_null_calibration},
        {3, "planted-alpha recovery of directional ratios", check_planted_recovery},
        {4, "long-run variance oracle (iid and AR(1))", check_hac_oracle},
        {5, "OLS extended-precision oracle equivalence", check_ols_oracle},
        {6, "trend-test size on zero-slope AR(1) series", check_trend_size},
        {7, "beta-regression recovery and gradient check", check_beta_regression},
        {8, "evaluation-date counts 81/79/72 for h=3/6/12", check_date_span},
        {9, "byte-identical outputs across worker counts", check_determinism},
        {10, "pairwise antisymmetry and scale invariance", check_pairwise_properties},
    };

    int failures = 0;
    for (const auto& c : checks) {
        g_detail.clear();
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            detail("exception: %s", e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d (%6.1fs): %s — %s\n", ok ? "PASS" : "FAIL",
                    c.id, secs, c.name, g_detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failures,
                checks.size());
    return failures;
}
