#include "peerperf/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "peerperf/csv.hpp"
#include "peerperf/errors.hpp"

namespace peerperf {

namespace {

double parse_double(const std::string& s, const std::string& path, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw ParseError(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

Date parse_date_at(const std::string& s, const std::string& path, std::size_t line) {
    try {
        return Date::parse(s);
    } catch (const ParseError& e) {
        throw ParseError(path + ":" + std::to_string(line) + ": " + e.what());
    }
}

void write_value(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out << buf;
}

}  // namespace

std::size_t ReturnPanel::firm_index(const std::string& id) const {
    auto it = std::lower_bound(firm_ids.begin(), firm_ids.end(), id);
    if (it == firm_ids.end() || *it != id) {
        throw DomainError("unknown firm id: " + id);
    }
    return static_cast<std::size_t>(it - firm_ids.begin());
}

std::string to_string(FactorModel m) {
    return m == FactorModel::carhart4 ? "carhart4" : "ff5";
}

FactorModel factor_model_from_string(const std::string& s) {
    if (s == "carhart4") return FactorModel::carhart4;
    if (s == "ff5") return FactorModel::ff5;
    throw ValidationError("unknown factor model '" + s + "' (expected carhart4 or ff5)");
}

const std::vector<std::string>& factor_columns(FactorModel m) {
    static const std::vector<std::string> c4 = {"mkt_rf", "smb", "hml", "mom"};
    static const std::vector<std::string> f5 = {"mkt_rf", "smb", "hml", "rmw", "cma"};
    return m == FactorModel::carhart4 ? c4 : f5;
}

ReturnPanel load_return_panel(const std::string& path) {
    CsvTable t = read_csv(path);
    std::size_t c_date = t.column("date");
    std::size_t c_firm = t.column("firm_id");
    std::size_t c_ret = t.column("ret");

    std::set<Date> dates;
    std::set<std::string> firms;
    std::map<std::pair<Date, std::string>, double> cells;

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t line = t.line_numbers[r];
        Date d = parse_date_at(t.rows[r][c_date], path, line);
        const std::string& firm = t.rows[r][c_firm];
        double ret = parse_double(t.rows[r][c_ret], path, line);
        if (!std::isfinite(ret) || ret <= -1.0) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": return must be finite and > -1, got " +
                                  t.rows[r][c_ret]);
        }
        auto key = std::make_pair(d, firm);
        if (!cells.emplace(key, ret).second) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": duplicate (date, firm) = (" + d.to_string() +
                                  ", " + firm + ")");
        }
        dates.insert(d);
        firms.insert(firm);
    }
    if (cells.empty()) throw ValidationError(path + ": no data rows");

    ReturnPanel panel;
    panel.calendar = TradingCalendar(std::vector<Date>(dates.begin(), dates.end()));
    panel.firm_ids.assign(firms.begin(), firms.end());
    panel.returns = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(dates.size()),
        static_cast<Eigen::Index>(firms.size()),
        std::numeric_limits<double>::quiet_NaN());

    for (const auto& [key, ret] : cells) {
        auto di = static_cast<Eigen::Index>(panel.calendar.find(key.first));
        auto fi = static_cast<Eigen::Index>(panel.firm_index(key.second));
        panel.returns(di, fi) = ret;
    }
    return panel;
}

FactorPanel load_factor_panel(const std::string& path, FactorModel model_id) {
    CsvTable t = read_csv(path);
    std::size_t c_date = t.column("date");
    const auto& cols = factor_columns(model_id);
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(t.column(c));

    std::map<Date, std::vector<double>> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t line = t.line_numbers[r];
        Date d = parse_date_at(t.rows[r][c_date], path, line);
        std::vector<double> v;
        for (std::size_t c : idx) {
            double x = parse_double(t.rows[r][c], path, line);
            if (!std::isfinite(x)) {
                throw ValidationError(path + ":" + std::to_string(line) +
                                      ": non-finite factor value");
            }
            v.push_back(x);
        }
        if (!rows.emplace(d, std::move(v)).second) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": duplicate date " + d.to_string());
        }
    }
    if (rows.empty()) throw ValidationError(path + ": no data rows");

    FactorPanel panel;
    panel.model_id = model_id;
    panel.names = cols;
    std::vector<Date> dates;
    for (const auto& [d, v] : rows) dates.push_back(d);
    panel.calendar = TradingCalendar(std::move(dates));
    panel.factors.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(cols.size()));
    Eigen::Index r = 0;
    for (const auto& [d, v] : rows) {
        for (Eigen::Index c = 0; c < panel.factors.cols(); ++c) {
            panel.factors(r, c) = v[static_cast<std::size_t>(c)];
        }
        ++r;
    }
    return panel;
}

EmissionsTable load_emissions(const std::string& path) {
    CsvTable t = read_csv(path);
    std::size_t c_firm = t.column("firm_id");
    std::size_t c_fy = t.column("fiscal_year");
    std::size_t c_s1 = t.column("scope1");
    std::size_t c_s2 = t.column("scope2");
    std::size_t c_s3 = t.column("scope3");
    std::size_t c_rev = t.column("revenue_musd");
    std::size_t c_rel = t.column("release_date");

    EmissionsTable table;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t line = t.line_numbers[r];
        EmissionsRecord rec;
        rec.firm_id = t.rows[r][c_firm];
        rec.fiscal_year = static_cast<int>(parse_double(t.rows[r][c_fy], path, line));
        rec.scope1 = parse_double(t.rows[r][c_s1], path, line);
        rec.scope2 = parse_double(t.rows[r][c_s2], path, line);
        rec.scope3 = parse_double(t.rows[r][c_s3], path, line);
        rec.revenue_musd = parse_double(t.rows[r][c_rev], path, line);
        rec.release_date = parse_date_at(t.rows[r][c_rel], path, line);
        if (rec.scope1 < 0 || rec.scope2 < 0 || rec.scope3 < 0) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": negative emissions scope");
        }
        if (rec.revenue_musd <= 0) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": revenue must be positive");
        }
        if (rec.release_date < Date{rec.fiscal_year, 12, 31}) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": release_date precedes end of fiscal year");
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

void write_return_panel(const ReturnPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "date,firm_id,ret\n";
    for (Eigen::Index d = 0; d < panel.returns.rows(); ++d) {
        for (Eigen::Index f = 0; f < panel.returns.cols(); ++f) {
            if (!panel.present(d, f)) continue;
            out << panel.calendar[static_cast<std::size_t>(d)].to_string() << ','
                << panel.firm_ids[static_cast<std::size_t>(f)] << ',';
            write_value(out, panel.returns(d, f));
            out << '\n';
        }
    }
}

void write_factor_panel(const FactorPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "date";
    for (const auto& n : panel.names) out << ',' << n;
    out << '\n';
    for (Eigen::Index d = 0; d < panel.factors.rows(); ++d) {
        out << panel.calendar[static_cast<std::size_t>(d)].to_string();
        for (Eigen::Index c = 0; c < panel.factors.cols(); ++c) {
            out << ',';
            write_value(out, panel.factors(d, c));
        }
        out << '\n';
    }
}

void write_emissions(const EmissionsTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "firm_id,fiscal_year,scope1,scope2,scope3,revenue_musd,release_date\n";
    for (const auto& rec : table.records) {
        out << rec.firm_id << ',' << rec.fiscal_year << ',';
        write_value(out, rec.scope1);
        out << ',';
        write_value(out, rec.scope2);
        out << ',';
        write_value(out, rec.scope3);
        out << ',';
        write_value(out, rec.revenue_musd);
        out << ',' << rec.release_date.to_string() << '\n';
    }
}

double ghg_intensity(const EmissionsRecord& rec) {
    if (rec.revenue_musd <= 0) throw DomainError("revenue must be positive");
    return (rec.scope1 + rec.scope2 + rec.scope3) / rec.revenue_musd;
}

std::optional<double> latest_intensity(const EmissionsTable& table,
                                       const std::string& firm_id, Month as_of) {
    const Date cutoff = as_of.last_day();
    const EmissionsRecord* best = nullptr;
    for (const auto& rec : table.records) {
        if (rec.firm_id != firm_id || rec.release_date > cutoff) continue;
        if (!best || rec.release_date > best->release_date ||
            (rec.release_date == best->release_date &&
             rec.fiscal_year > best->fiscal_year)) {
            best = &rec;
        }
    }
    if (!best) return std::nullopt;
    return ghg_intensity(*best);
}

GroupAssignment form_peer_groups(const EmissionsTable& table,
                                 const std::vector<std::string>& universe,
                                 Month as_of, double q_lo, double q_hi) {
    if (!(q_lo > 0 && q_lo < q_hi && q_hi < 1)) {
        throw DomainError("percentiles must satisfy 0 < q_lo < q_hi < 1");
    }
    std::vector<std::pair<double, std::string>> eligible;
    for (const auto& firm : universe) {
        if (auto g = latest_intensity(table, firm, as_of)) {
            eligible.emplace_back(*g, firm);
        }
    }
    if (eligible.size() < 8) {
        throw InsufficientDataError(
            "fewer than 8 firms with available GHG intensity at " + as_of.to_string() +
            " (" + std::to_string(eligible.size()) + ")");
    }
    // Ascending by intensity, ties by firm_id.
    std::sort(eligible.begin(), eligible.end());

    const std::size_t n = eligible.size();
    const std::size_t m = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * q_lo));

    GroupAssignment out;
    out.as_of = as_of;
    out.q_lo = q_lo;
    out.q_hi = q_hi;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < m) {
            out.green.push_back(eligible[i].second);
        } else if (i >= n - m) {
            out.brown.push_back(eligible[i].second);
        } else {
            out.neutral.push_back(eligible[i].second);
        }
    }
    std::sort(out.green.begin(), out.green.end());
    std::sort(out.brown.begin(), out.brown.end());
    std::sort(out.neutral.begin(), out.neutral.end());
    return out;
}

}  // namespace peerperf
