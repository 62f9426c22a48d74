#include "glycast/timestamp.hpp"

#include <cstdio>
#include <stdexcept>

namespace glycast {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
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

} // namespace

Timestamp make_timestamp(int year, int month, int day,
                         int hour, int minute, int second) {
    return {days_from_civil(year, month, day) * 86400 +
            hour * 3600 + minute * 60 + second};
}

std::string format_rfc3339(Timestamp t) {
    std::int64_t days = t.sec / 86400;
    std::int64_t sod = t.sec % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ",
                  y, m, d,
                  static_cast<long long>(sod / 3600),
                  static_cast<long long>((sod / 60) % 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

Timestamp parse_rfc3339(const std::string& text) {
    int y, mo, d, h, mi, s;
    char tz = 0;
    int n = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c%n",
                    &y, &mo, &d, &h, &mi, &s, &tz, &n) != 7 ||
        tz != 'Z' || static_cast<size_t>(n) != text.size()) {
        throw std::invalid_argument("bad RFC 3339 timestamp: '" + text + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
        throw std::invalid_argument("out-of-range RFC 3339 timestamp: '" + text + "'");
    }
    return make_timestamp(y, mo, d, h, mi, s);
}

} // namespace glycast
