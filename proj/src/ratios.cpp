#include "peerperf/ratios.hpp"

#include <algorithm>
#include <cmath>

#include "peerperf/errors.hpp"
#include "peerperf/rng.hpp"

namespace peerperf {

namespace {

double pi0_at(const std::vector<double>& p, double lambda) {
    std::size_t count = 0;
    for (double v : p) {
        if (v > lambda) ++count;
    }
    return static_cast<double>(count) /
           ((1.0 - lambda) * static_cast<double>(p.size()));
}

}  // namespace

Pi0Estimate storey_pi0(const std::vector<double>& p_values, std::uint64_t rng_key,
                       const std::vector<double>& lambda_grid, int bootstrap_reps) {
    const std::size_t n = p_values.size();
    if (n < 10) {
        throw InsufficientDataError("storey_pi0 needs at least 10 p-values, got " +
                                    std::to_string(n));
    }
    if (lambda_grid.empty()) throw DomainError("empty lambda grid");
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value outside [0,1]");
    }

    std::vector<double> pi0(lambda_grid.size());
    double pi0_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < lambda_grid.size(); ++a) {
        pi0[a] = pi0_at(p_values, lambda_grid[a]);
        pi0_min = std::min(pi0_min, pi0[a]);
    }

    // Bootstrap MSE of each candidate against the grid minimum (Storey 2002).
    std::vector<double> mse(lambda_grid.size(), 0.0);
    CounterRng rng(rng_key);
    std::vector<double> resample(n);
    for (int b = 0; b < bootstrap_reps; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            resample[i] = p_values[rng.uniform_below(n)];
        }
        for (std::size_t a = 0; a < lambda_grid.size(); ++a) {
            double d = pi0_at(resample, lambda_grid[a]) - pi0_min;
            mse[a] += d * d;
        }
    }

    std::size_t best = 0;
    for (std::size_t a = 1; a < lambda_grid.size(); ++a) {
        if (mse[a] < mse[best]) best = a;
    }
    double spread = *std::max_element(mse.begin(), mse.end()) -
                    *std::min_element(mse.begin(), mse.end());

    Pi0Estimate out;
    if (spread < 1e-12 * static_cast<double>(bootstrap_reps)) {
        out.lambda_star = 0.5;  // flat MSE fallback
    } else {
        out.lambda_star = lambda_grid[best];
    }
    out.pi0_raw = std::clamp(pi0_at(p_values, out.lambda_star), 0.0, 1.0);
    return out;
}

DirectionalSplit split_ratios(const PairEvidence& evidence, double pi0, double gamma) {
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw DomainError("pi0 outside [0,1]");
    if (evidence.p_values.size() != evidence.signs.size()) {
        throw AlignmentError("p-value and sign vectors differ in length");
    }
    const double n = static_cast<double>(evidence.p_values.size());

    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < evidence.p_values.size(); ++i) {
        if (evidence.p_values[i] <= gamma) {
            if (evidence.signs[i] > 0) ++pos;
            if (evidence.signs[i] < 0) ++neg;
        }
    }
    // Haircut the rejection counts by the expected share of false discoveries
    // in each tail.
    const double fd = pi0 * gamma / 2.0;
    const double a_plus = std::max(0.0, static_cast<double>(pos) / n - fd);
    const double a_minus = std::max(0.0, static_cast<double>(neg) / n - fd);

    DirectionalSplit out;
    const double rest = 1.0 - pi0;
    if (a_plus + a_minus <= 0.0) {
        out.pi_plus = rest / 2.0;
        out.pi_minus = rest - out.pi_plus;
    } else {
        out.pi_plus = rest * (a_plus / (a_plus + a_minus));
        out.pi_minus = rest - out.pi_plus;  // closure holds exactly
    }
    return out;
}

RatioTriple stock_ratio_triple(const PairEvidence& evidence, std::uint64_t rng_key,
                               double gamma, const std::vector<double>& lambda_grid) {
    Pi0Estimate est = storey_pi0(evidence.p_values, rng_key, lambda_grid);
    DirectionalSplit split = split_ratios(evidence, est.pi0_raw, gamma);

    RatioTriple out;
    out.pi0 = est.pi0_raw;
    out.pi_minus = split.pi_minus;
    out.pi_plus = split.pi_plus;
    out.lambda_star = est.lambda_star;
    out.n_peers = evidence.p_values.size();
    return out;
}

AggregateRatios aggregate_ratios(const std::vector<RatioTriple>& triples) {
    if (triples.empty()) throw InsufficientDataError("empty peer group");
    AggregateRatios out;
    double s0 = 0.0, sm = 0.0;
    for (const auto& t : triples) {
        s0 += t.pi0;
        sm += t.pi_minus;
    }
    const double n = static_cast<double>(triples.size());
    out.pi0 = s0 / n;
    out.pi_minus = sm / n;
    out.pi_plus = 1.0 - out.pi0 - out.pi_minus;
    out.heterogeneity = 1.0 - out.pi0;
    out.n_firms = triples.size();
    return out;
}

}  // namespace peerperf
