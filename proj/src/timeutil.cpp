#include "txflow/timeutil.hpp"

#include <cctype>
#include <charconv>

#include "txflow/error.hpp"

namespace txflow {

namespace chr = std::chrono;

TimeScale parse_time_scale(std::string_view name) {
    if (name == "day") return TimeScale::Day;
    if (name == "month") return TimeScale::Month;
    if (name == "year") return TimeScale::Year;
    throw std::invalid_argument("unknown time scale '" + std::string(name) + "' (day|month|year)");
}

std::string to_string(TimeScale scale) {
    switch (scale) {
        case TimeScale::Day: return "day";
        case TimeScale::Month: return "month";
        case TimeScale::Year: return "year";
    }
    return "?";
}

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return res.ec == std::errc{};
}

chr::year_month_day checked_date(int y, int m, int d, std::string_view text) {
    chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                            chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date in '" + std::string(text) + "'");
    return ymd;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    auto fail = [&] { return DataError("invalid UTC timestamp '" + std::string(text) + "'"); };
    int y, mo, d, h, mi, s;
    if (text.size() < 19 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) ||
        text[7] != '-' || !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
        !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) || text[16] != ':' ||
        !read_int(text, 17, 2, s))
        throw fail();
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        // fractional seconds are truncated
        std::size_t i = 1;
        while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
        rest.remove_prefix(i);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) throw fail();
    if (h > 23 || mi > 59 || s > 59) throw fail();
    auto ymd = checked_date(y, mo, d, text);
    return chr::sys_days{ymd} + chr::hours{h} + chr::minutes{mi} + chr::seconds{s};
}

std::string format_timestamp(Timestamp ts) {
    auto day = chr::floor<chr::days>(ts);
    chr::year_month_day ymd{day};
    chr::hh_mm_ss hms{ts - day};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

std::vector<chr::sys_days> Period::days() const {
    std::vector<chr::sys_days> out;
    if (empty()) return out;
    for (auto d = chr::floor<chr::days>(start); d < end; d += chr::days{1}) out.push_back(d);
    return out;
}

bool Period::aligned_to(TimeScale scale) const {
    if (empty()) return false;
    auto at_midnight = [](Timestamp t) { return chr::floor<chr::days>(t) == t; };
    if (!at_midnight(start) || !at_midnight(end)) return false;
    if (scale == TimeScale::Day) return true;
    chr::year_month_day a{chr::floor<chr::days>(start)};
    chr::year_month_day b{chr::floor<chr::days>(end)};
    if (a.day() != chr::day{1} || b.day() != chr::day{1}) return false;
    if (scale == TimeScale::Month) return true;
    return a.month() == chr::January && b.month() == chr::January;
}

std::string Period::label() const {
    char buf[64];
    chr::year_month_day a{chr::floor<chr::days>(start)};
    const int y = static_cast<int>(a.year());
    const unsigned m = static_cast<unsigned>(a.month());
    if (*this == Period::year(y)) {
        std::snprintf(buf, sizeof buf, "%04d", y);
    } else if (*this == Period::month(y, m)) {
        std::snprintf(buf, sizeof buf, "%04d-%02u", y, m);
    } else if (*this == Period::day(chr::floor<chr::days>(start))) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, static_cast<unsigned>(a.day()));
    } else {
        return format_timestamp(start) + "_" + format_timestamp(end);
    }
    return buf;
}

Period Period::month(int year, unsigned month) {
    chr::year_month first{chr::year{year}, chr::month{month}};
    auto next = first + chr::months{1};
    return {chr::sys_days{first / 1}, chr::sys_days{next / 1}};
}

Period Period::day(chr::sys_days d) { return {d, d + chr::days{1}}; }

Period Period::year(int year) {
    return {chr::sys_days{chr::year{year} / 1 / 1}, chr::sys_days{chr::year{year + 1} / 1 / 1}};
}

Period parse_period(std::string_view text, TimeScale scale) {
    auto fail = [&] {
        return std::invalid_argument("period '" + std::string(text) + "' does not match scale " +
                                     to_string(scale));
    };
    int y = 0, m = 1, d = 1;
    switch (scale) {
        case TimeScale::Year:
            if (text.size() != 4 || !read_int(text, 0, 4, y)) throw fail();
            return Period::year(y);
        case TimeScale::Month:
            if (text.size() != 7 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, m))
                throw fail();
            if (m < 1 || m > 12) throw fail();
            return Period::month(y, static_cast<unsigned>(m));
        case TimeScale::Day:
            if (text.size() != 10 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, m) ||
                text[7] != '-' || !read_int(text, 8, 2, d))
                throw fail();
            chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                    chr::day{static_cast<unsigned>(d)}};
            if (!ymd.ok()) throw fail();
            return Period::day(chr::sys_days{ymd});
    }
    throw fail();
}

std::vector<Period> periods_between(std::string_view from, std::string_view to, TimeScale scale) {
    Period first = parse_period(from, scale);
    Period last = parse_period(to, scale);
    if (last.start < first.start)
        throw std::invalid_argument("--to precedes --from");
    std::vector<Period> out;
    Period cur = first;
    while (cur.start <= last.start) {
        out.push_back(cur);
        chr::year_month_day ymd{chr::floor<chr::days>(cur.end)};
        switch (scale) {
            case TimeScale::Day: cur = Period::day(chr::floor<chr::days>(cur.end)); break;
            case TimeScale::Month:
                cur = Period::month(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
                break;
            case TimeScale::Year: cur = Period::year(static_cast<int>(ymd.year())); break;
        }
    }
    return out;
}

int utc_hour(Timestamp ts) {
    auto since_midnight = ts - chr::floor<chr::days>(ts);
    return static_cast<int>(chr::duration_cast<chr::hours>(since_midnight).count());
}

}  // namespace txflow
