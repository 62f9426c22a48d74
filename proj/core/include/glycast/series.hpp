#ifndef GLYCAST_SERIES_HPP
#define GLYCAST_SERIES_HPP

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "glycast/timestamp.hpp"
#include "glycast/variable.hpp"

namespace glycast {

/// Explicit marker for a missing sample in a UniformSeries. Gaps are never
/// silent zeros; use is_gap() rather than comparing against this value.
inline constexpr double kGap = std::numeric_limits<double>::quiet_NaN();

inline bool is_gap(double v) { return std::isnan(v); }

/// A fixed sampling grid: slot i covers [start + i*step_s, start + (i+1)*step_s).
struct GridSpec {
    Timestamp start;
    std::int64_t step_s = 300;
    std::size_t n = 0;

    Timestamp time_at(std::size_t i) const {
        return start + static_cast<std::int64_t>(i) * step_s;
    }
    Timestamp end() const { return time_at(n); }
};

struct Event {
    Timestamp time;
    double value = 0.0;
};

/// Irregular timestamped events (boluses, meals, sessions) of one variable.
/// Timestamps strictly increase; dose-like values are non-negative.
struct EventSeries {
    VariableId variable = VariableId::insulin_bolus;
    std::vector<Event> events;

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
};

/// Fixed-step sampled signal. values[i] belongs to start + i*step_s; missing
/// samples are explicit kGap entries.
struct UniformSeries {
    VariableId variable = VariableId::glucose;
    Timestamp start;
    std::int64_t step_s = 300;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    Timestamp time_at(std::size_t i) const {
        return start + static_cast<std::int64_t>(i) * step_s;
    }
    Timestamp end() const { return time_at(values.size()); }
    GridSpec grid() const { return {start, step_s, values.size()}; }

    std::size_t gap_count() const {
        std::size_t c = 0;
        for (double v : values) c += is_gap(v);
        return c;
    }

    void validate() const;
};

using SeriesData = std::variant<EventSeries, UniformSeries>;

/// One subject's multi-variable bundle plus metadata.
struct PatientRecord {
    std::string patient_id;
    Timestamp span_start;
    Timestamp span_end;
    std::map<VariableId, SeriesData> series;

    bool has(VariableId v) const { return series.count(v) != 0; }
    const EventSeries* events(VariableId v) const;
    const UniformSeries* uniform(VariableId v) const;
};

} // namespace glycast

#endif
