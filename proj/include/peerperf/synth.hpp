#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peerperf/panels.hpp"
#include "peerperf/ratios.hpp"

namespace peerperf {

// Synthetic panel generator with planted alpha structure. Daily alphas are in
// decimal units (0.0008 = 8 bp/day, roughly 22% annualized on 252 days).
struct SimSpec {
    int n_firms = 40;
    int n_days = 252;
    int n_factors = 4;
    double factor_vol = 0.008;          // daily
    double residual_vol = 0.01;         // daily
    double cross_residual_corr = 0.0;   // in [-0.5, 0.5]
    double frac_zero = 1.0;
    double frac_negative = 0.0;
    double frac_positive = 0.0;
    double alpha_negative = -0.0008;    // daily decimal
    double alpha_positive = 0.0008;
    Date start_date{2014, 1, 1};
    std::uint64_t seed = 1;
};

struct SimTruth {
    std::vector<std::string> firm_ids;
    std::vector<double> alphas;  // true daily alpha per firm
};

struct SimPanel {
    ReturnPanel returns;
    FactorPanel factors;
    EmissionsTable emissions;
    SimTruth truth;
};

void validate(const SimSpec& spec);

// r_it = alpha_i + sum_k beta_ik F_kt + eps_it, cross-sectional residual
// correlation via a single common residual factor. Emissions records are laid
// out so GHG intensity is monotone in the firm index.
SimPanel simulate_panel(const SimSpec& spec);

// Exact peer proportions implied by the true alphas: peers with strictly
// larger / equal / strictly smaller alpha than the firm.
RatioTriple brute_force_triple(const SimTruth& truth, std::size_t firm);

}  // namespace peerperf
