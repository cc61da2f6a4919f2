#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace peerperf {

// Calendar day. Serial representation counts days since 1970-01-01
// (proleptic Gregorian), negative before.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    // "YYYY-MM-DD"
    std::string to_string() const;
    static Date parse(const std::string& s);

    int weekday() const;  // 0 = Sunday .. 6 = Saturday
};

// Calendar month, stored as a flat index so arithmetic is trivial.
struct Month {
    int index = 0;  // year*12 + (month-1)

    Month() = default;
    Month(int y, int m) : index(y * 12 + (m - 1)) {}

    auto operator<=>(const Month&) const = default;

    int year() const { return index >= 0 ? index / 12 : -((-index + 11) / 12); }
    int month() const { return index - year() * 12 + 1; }

    Month operator+(int k) const { Month r; r.index = index + k; return r; }
    Month operator-(int k) const { Month r; r.index = index - k; return r; }
    int operator-(Month o) const { return index - o.index; }
    Month& operator++() { ++index; return *this; }

    Date first_day() const { return Date{year(), month(), 1}; }
    Date last_day() const;

    // "YYYY-MM"
    std::string to_string() const;
    static Month parse(const std::string& s);
    static Month of(const Date& d) { return Month(d.year, d.month); }
};

// Ordered set of trading days.
class TradingCalendar {
public:
    TradingCalendar() = default;
    explicit TradingCalendar(std::vector<Date> days);  // validates ordering

    std::size_t size() const { return days_.size(); }
    bool empty() const { return days_.empty(); }
    const Date& operator[](std::size_t i) const { return days_[i]; }
    const std::vector<Date>& days() const { return days_; }
    const Date& front() const { return days_.front(); }
    const Date& back() const { return days_.back(); }

    // Index of the first day >= d (size() if none).
    std::size_t lower_bound(const Date& d) const;
    // Index of d, or size() if absent.
    std::size_t find(const Date& d) const;

    // All weekdays in [a, b]; a stand-in trading calendar for synthetic data.
    static TradingCalendar weekdays(const Date& a, const Date& b);

private:
    std::vector<Date> days_;
};

}  // namespace peerperf
