#include "peerperf/dates.hpp"

#include <algorithm>
#include <cstdio>

#include "peerperf/errors.hpp"

namespace peerperf {

namespace {

// Days from 1970-01-01 to y-m-d, proleptic Gregorian (Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

int days_in_month(int y, int m) {
    static const int n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return n[m - 1];
}

}  // namespace

std::int64_t Date::serial() const { return days_from_civil(year, month, day); }

Date Date::from_serial(std::int64_t days) {
    Date d;
    civil_from_days(days, d.year, d.month, d.day);
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& s) {
    int y = 0, m = 0, d = 0;
    char c1 = 0, c2 = 0;
    if (std::sscanf(s.c_str(), "%d%c%d%c%d", &y, &c1, &m, &c2, &d) != 5 ||
        c1 != '-' || c2 != '-' || m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
        throw ParseError("invalid date: '" + s + "'");
    }
    return Date{y, m, d};
}

int Date::weekday() const {
    std::int64_t s = serial();
    return static_cast<int>(((s % 7) + 11) % 7);  // 1970-01-01 was a Thursday
}

Date Month::last_day() const {
    return Date{year(), month(), days_in_month(year(), month())};
}

std::string Month::to_string() const {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year(), month());
    return buf;
}

Month Month::parse(const std::string& s) {
    int y = 0, m = 0;
    char c = 0;
    if (std::sscanf(s.c_str(), "%d%c%d", &y, &c, &m) != 3 || c != '-' || m < 1 || m > 12) {
        throw ParseError("invalid month: '" + s + "'");
    }
    return Month(y, m);
}

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
    for (std::size_t i = 1; i < days_.size(); ++i) {
        if (!(days_[i - 1] < days_[i])) {
            throw ValidationError("trading calendar not strictly increasing at " +
                                  days_[i].to_string());
        }
    }
}

std::size_t TradingCalendar::lower_bound(const Date& d) const {
    return static_cast<std::size_t>(
        std::lower_bound(days_.begin(), days_.end(), d) - days_.begin());
}

std::size_t TradingCalendar::find(const Date& d) const {
    std::size_t i = lower_bound(d);
    if (i < days_.size() && days_[i] == d) return i;
    return days_.size();
}

TradingCalendar TradingCalendar::weekdays(const Date& a, const Date& b) {
    std::vector<Date> days;
    for (std::int64_t s = a.serial(); s <= b.serial(); ++s) {
        Date d = Date::from_serial(s);
        int w = d.weekday();
        if (w != 0 && w != 6) days.push_back(d);
    }
    return TradingCalendar(std::move(days));
}

}  // namespace peerperf
