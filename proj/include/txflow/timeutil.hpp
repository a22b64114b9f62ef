#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace txflow {

using Timestamp = std::chrono::sys_seconds;

enum class TimeScale { Day, Month, Year };

TimeScale parse_time_scale(std::string_view name);
std::string to_string(TimeScale scale);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ", an optional "+00:00" offset instead of Z,
/// and a space in place of 'T'. Only UTC is accepted. Throws DataError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Half-open UTC interval [start, end).
struct Period {
    Timestamp start;
    Timestamp end;

    bool contains(Timestamp ts) const { return start <= ts && ts < end; }
    bool empty() const { return end <= start; }

    /// Whole UTC days covered; partial days at either end count as a day.
    std::vector<std::chrono::sys_days> days() const;

    /// True when start and end fall on boundaries of the given scale.
    bool aligned_to(TimeScale scale) const;

    /// "2019-09" for a month, "2019-09-01" for a day, "2019" for a year,
    /// otherwise "<start>_<end>" in ISO form.
    std::string label() const;

    static Period month(int year, unsigned month);
    static Period day(std::chrono::sys_days d);
    static Period year(int year);

    friend bool operator==(const Period&, const Period&) = default;
};

/// Parses "2019-01" (month), "2019-01-15" (day) or "2019" (year) into the
/// period of the given scale that starts there.
Period parse_period(std::string_view text, TimeScale scale);

/// Consecutive periods of `scale` from the one starting at `from` through the
/// one starting at `to`, inclusive.
std::vector<Period> periods_between(std::string_view from, std::string_view to, TimeScale scale);

/// Hour of day (0-23) in UTC.
int utc_hour(Timestamp ts);

}  // namespace txflow
