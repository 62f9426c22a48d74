#ifndef GLYCAST_TIMESTAMP_HPP
#define GLYCAST_TIMESTAMP_HPP

#include <cstdint>
#include <compare>
#include <string>

namespace glycast {

/// UTC instant, integer seconds since the Unix epoch.
/// All series inside one PatientRecord share this epoch.
struct Timestamp {
    std::int64_t sec = 0;

    constexpr auto operator<=>(const Timestamp&) const = default;

    constexpr Timestamp operator+(std::int64_t s) const { return {sec + s}; }
    constexpr Timestamp operator-(std::int64_t s) const { return {sec - s}; }
    constexpr std::int64_t operator-(Timestamp o) const { return sec - o.sec; }

    /// Seconds into the UTC day, in [0, 86400).
    constexpr std::int64_t second_of_day() const {
        std::int64_t r = sec % 86400;
        return r < 0 ? r + 86400 : r;
    }
    /// Hour of the UTC day as a real number in [0, 24).
    constexpr double hour_of_day() const {
        return static_cast<double>(second_of_day()) / 3600.0;
    }
};

/// Formats as RFC 3339 UTC, e.g. "2021-03-01T08:05:00Z".
std::string format_rfc3339(Timestamp t);

/// Parses RFC 3339 UTC ("YYYY-MM-DDTHH:MM:SSZ"). Throws std::invalid_argument
/// on malformed input. Only the 'Z' offset is accepted.
Timestamp parse_rfc3339(const std::string& text);

/// Timestamp for a civil UTC date and time of day.
Timestamp make_timestamp(int year, int month, int day,
                         int hour = 0, int minute = 0, int second = 0);

} // namespace glycast

#endif
