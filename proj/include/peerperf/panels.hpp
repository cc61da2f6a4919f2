#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "peerperf/dates.hpp"

namespace peerperf {

// Daily simple returns per firm; NaN marks a missing observation.
struct ReturnPanel {
    TradingCalendar calendar;
    std::vector<std::string> firm_ids;
    Eigen::MatrixXd returns;  // day x firm

    bool present(Eigen::Index day, Eigen::Index firm) const {
        return !std::isnan(returns(day, firm));
    }
    std::size_t firm_index(const std::string& id) const;
};

enum class FactorModel { carhart4, ff5 };

std::string to_string(FactorModel m);
FactorModel factor_model_from_string(const std::string& s);
const std::vector<std::string>& factor_columns(FactorModel m);

struct FactorPanel {
    TradingCalendar calendar;
    FactorModel model_id = FactorModel::carhart4;
    Eigen::MatrixXd factors;  // day x K
    std::vector<std::string> names;

    Eigen::Index k() const { return factors.cols(); }
};

struct EmissionsRecord {
    std::string firm_id;
    int fiscal_year = 0;
    double scope1 = 0, scope2 = 0, scope3 = 0;  // tons CO2e
    double revenue_musd = 0;
    Date release_date;
};

struct EmissionsTable {
    std::vector<EmissionsRecord> records;
};

// GHG intensity: total scope 1+2+3 emissions per $1M revenue.
double ghg_intensity(const EmissionsRecord& rec);

// Intensity from the most recently released record with release_date <= end of
// as_of; ties on release_date resolved toward the later fiscal year.
std::optional<double> latest_intensity(const EmissionsTable& table,
                                       const std::string& firm_id, Month as_of);

struct GroupAssignment {
    Month as_of;
    std::vector<std::string> green;
    std::vector<std::string> brown;
    std::vector<std::string> neutral;
    double q_lo = 0.25;
    double q_hi = 0.75;
};

}  // namespace peerperf
