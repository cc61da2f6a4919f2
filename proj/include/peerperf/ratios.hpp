#pragma once

#include <cstdint>
#include <vector>

#include "peerperf/dates.hpp"

namespace peerperf {

// Pairwise evidence for one stock against its n = N-1 peers: the equal-
// performance p-values and the signs of the alpha differentials (+1 means the
// stock beats the peer).
struct PairEvidence {
    std::vector<double> p_values;
    std::vector<int> signs;  // -1, 0, +1
};

struct RatioTriple {
    double pi0 = 1.0;
    double pi_minus = 0.0;
    double pi_plus = 0.0;
    double lambda_star = 0.5;
    std::size_t n_peers = 0;
};

struct AggregateRatios {
    double pi0 = 1.0;
    double pi_minus = 0.0;
    double pi_plus = 0.0;
    double heterogeneity = 0.0;  // 1 - pi0
    std::size_t n_firms = 0;
    Month formation_month;
    int horizon = 0;
};

inline std::vector<double> default_lambda_grid() {
    return {0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70};
}

// Storey's estimator of the equal-performance proportion with bootstrap MSE
// selection of the cutoff lambda. Deterministic given rng_key.
struct Pi0Estimate {
    double pi0_raw = 1.0;  // clamped to [0,1]
    double lambda_star = 0.5;
};
Pi0Estimate storey_pi0(const std::vector<double>& p_values, std::uint64_t rng_key,
                       const std::vector<double>& lambda_grid = default_lambda_grid(),
                       int bootstrap_reps = 500);

// FDR-adjusted split of the non-null mass 1 - pi0 into directional components.
struct DirectionalSplit {
    double pi_minus = 0.0;
    double pi_plus = 0.0;
};
DirectionalSplit split_ratios(const PairEvidence& evidence, double pi0,
                              double gamma = 0.10);

RatioTriple stock_ratio_triple(const PairEvidence& evidence, std::uint64_t rng_key,
                               double gamma = 0.10,
                               const std::vector<double>& lambda_grid = default_lambda_grid());

AggregateRatios aggregate_ratios(const std::vector<RatioTriple>& triples);

}  // namespace peerperf
