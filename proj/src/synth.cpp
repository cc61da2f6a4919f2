#include "peerperf/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "peerperf/errors.hpp"
#include "peerperf/rng.hpp"

namespace peerperf {

void validate(const SimSpec& spec) {
    if (spec.n_firms < 2 || spec.n_days < 2) throw DomainError("panel too small");
    if (spec.n_factors < 1 || spec.n_factors > 5) {
        throw DomainError("factor count must be in [1,5]");
    }
    double total = spec.frac_zero + spec.frac_negative + spec.frac_positive;
    if (std::fabs(total - 1.0) > 1e-9) {
        throw DomainError("alpha fractions must sum to 1");
    }
    if (std::fabs(spec.cross_residual_corr) > 0.5) {
        throw DomainError("cross-residual correlation must lie in [-0.5, 0.5]");
    }
    if (spec.factor_vol <= 0 || spec.residual_vol <= 0) {
        throw DomainError("volatilities must be positive");
    }
}

SimPanel simulate_panel(const SimSpec& spec) {
    validate(spec);
    const int n = spec.n_firms;
    const int t = spec.n_days;

    // Enough weekdays to cover t trading days.
    Date end = Date::from_serial(spec.start_date.serial() +
                                 static_cast<std::int64_t>(t) * 7 / 5 + 14);
    TradingCalendar cal = TradingCalendar::weekdays(spec.start_date, end);
    std::vector<Date> days(cal.days().begin(), cal.days().begin() + t);
    cal = TradingCalendar(std::move(days));

    SimPanel out;
    out.returns.calendar = cal;
    out.factors.calendar = cal;
    out.factors.model_id =
        spec.n_factors == 5 ? FactorModel::ff5 : FactorModel::carhart4;
    {
        const auto& cols = factor_columns(out.factors.model_id);
        out.factors.names.assign(cols.begin(),
                                 cols.begin() + std::min<std::size_t>(
                                                    cols.size(),
                                                    static_cast<std::size_t>(spec.n_factors)));
        while (out.factors.names.size() < static_cast<std::size_t>(spec.n_factors)) {
            out.factors.names.push_back("f" + std::to_string(out.factors.names.size()));
        }
    }

    for (int i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "F%04d", i);
        out.returns.firm_ids.emplace_back(buf);
    }
    out.truth.firm_ids = out.returns.firm_ids;

    // Planted alphas, assigned through a seed-keyed permutation so the alpha
    // layout is independent of the (intensity-ordered) firm index.
    const int n_neg = static_cast<int>(std::floor(spec.frac_negative * n));
    const int n_pos = static_cast<int>(std::floor(spec.frac_positive * n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    {
        CounterRng rng(CounterRng::derive_key(spec.seed, {5}));
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
    }
    out.truth.alphas.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        double a = 0.0;
        if (r < n_neg) {
            a = spec.alpha_negative;
        } else if (r < n_neg + n_pos) {
            a = spec.alpha_positive;
        }
        out.truth.alphas[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = a;
    }

    // Factors.
    out.factors.factors.resize(t, spec.n_factors);
    for (int k = 0; k < spec.n_factors; ++k) {
        CounterRng rng(CounterRng::derive_key(spec.seed, {1, static_cast<std::uint64_t>(k)}));
        for (int d = 0; d < t; ++d) {
            out.factors.factors(d, k) = spec.factor_vol * rng.normal();
        }
    }

    // Common residual factor for cross-sectional correlation.
    Eigen::VectorXd common(t);
    {
        CounterRng rng(CounterRng::derive_key(spec.seed, {4}));
        for (int d = 0; d < t; ++d) common[d] = rng.normal();
    }
    const double rho = spec.cross_residual_corr;
    const double common_load = std::sqrt(std::fabs(rho));
    const double idio_load = std::sqrt(1.0 - std::fabs(rho));

    out.returns.returns.resize(t, n);
    for (int i = 0; i < n; ++i) {
        CounterRng beta_rng(CounterRng::derive_key(spec.seed, {2, static_cast<std::uint64_t>(i)}));
        Eigen::VectorXd beta(spec.n_factors);
        beta[0] = 0.8 + 0.4 * beta_rng.uniform();  // market beta around 1
        for (int k = 1; k < spec.n_factors; ++k) {
            beta[k] = -0.3 + 0.6 * beta_rng.uniform();
        }
        const double sign = (rho < 0.0 && (i % 2 == 1)) ? -1.0 : 1.0;
        CounterRng eps_rng(CounterRng::derive_key(spec.seed, {3, static_cast<std::uint64_t>(i)}));
        for (int d = 0; d < t; ++d) {
            double eps = spec.residual_vol *
                         (idio_load * eps_rng.normal() + sign * common_load * common[d]);
            out.returns.returns(d, i) = out.truth.alphas[static_cast<std::size_t>(i)] +
                                        out.factors.factors.row(d).head(spec.n_factors) * beta +
                                        eps;
        }
    }

    // Emissions with intensity monotone in firm index, released mid-year for
    // every fiscal year touching the panel (plus lead-in years so the first
    // formation month already has a release).
    const int y0 = spec.start_date.year - 2;
    const int y1 = cal.back().year;
    for (int i = 0; i < n; ++i) {
        for (int fy = y0; fy < y1; ++fy) {
            EmissionsRecord rec;
            rec.firm_id = out.returns.firm_ids[static_cast<std::size_t>(i)];
            rec.fiscal_year = fy;
            rec.scope1 = 50.0 * (i + 1);
            rec.scope2 = 30.0 * (i + 1);
            rec.scope3 = 20.0 * (i + 1);
            rec.revenue_musd = 1.0;
            rec.release_date = Date{fy + 1, 6, 30};
            out.emissions.records.push_back(std::move(rec));
        }
    }
    return out;
}

RatioTriple brute_force_triple(const SimTruth& truth, std::size_t firm) {
    const std::size_t n = truth.alphas.size();
    if (firm >= n) throw DomainError("firm index out of range");
    if (n < 2) throw InsufficientDataError("need at least two firms");

    std::size_t better = 0, worse = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == firm) continue;
        if (truth.alphas[j] > truth.alphas[firm]) {
            ++better;
        } else if (truth.alphas[j] < truth.alphas[firm]) {
            ++worse;
        } else {
            ++equal;
        }
    }
    const double peers = static_cast<double>(n - 1);
    RatioTriple out;
    out.pi0 = static_cast<double>(equal) / peers;
    out.pi_minus = static_cast<double>(better) / peers;
    out.pi_plus = 1.0 - out.pi0 - out.pi_minus;
    out.n_peers = n - 1;
    return out;
}

}  // namespace peerperf
