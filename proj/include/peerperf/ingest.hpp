#pragma once

#include <string>
#include <vector>

#include "peerperf/panels.hpp"

namespace peerperf {

// returns.csv: date,firm_id,ret (decimal simple returns, 0.01 = 1%).
ReturnPanel load_return_panel(const std::string& path);

// factors_carhart4.csv: date,mkt_rf,smb,hml,mom
// factors_ff5.csv:      date,mkt_rf,smb,hml,rmw,cma
FactorPanel load_factor_panel(const std::string& path, FactorModel model_id);

// emissions.csv: firm_id,fiscal_year,scope1,scope2,scope3,revenue_musd,release_date
EmissionsTable load_emissions(const std::string& path);

void write_return_panel(const ReturnPanel& panel, const std::string& path);
void write_factor_panel(const FactorPanel& panel, const std::string& path);
void write_emissions(const EmissionsTable& table, const std::string& path);

// Rank-based quartile split: firms with available intensity sorted ascending
// (ties by firm_id), green = lowest m, brown = highest m, m = floor(n*q_lo).
GroupAssignment form_peer_groups(const EmissionsTable& table,
                                 const std::vector<std::string>& universe,
                                 Month as_of, double q_lo = 0.25,
                                 double q_hi = 0.75);

}  // namespace peerperf
