#include "glycast/series_ops.hpp"

#include <algorithm>
#include <stdexcept>

#include "glycast/errors.hpp"

namespace glycast {

void EventSeries::validate() const {
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && !(events[i - 1].time < events[i].time)) {
            throw std::invalid_argument(
                "event timestamps must strictly increase (" +
                std::string(to_string(variable)) + ")");
        }
        if (is_dose_like(variable) && events[i].value < 0.0) {
            throw std::invalid_argument(
                "negative dose in " + std::string(to_string(variable)));
        }
    }
}

void UniformSeries::validate() const {
    if (step_s <= 0) throw std::invalid_argument("step_s must be positive");
}

const EventSeries* PatientRecord::events(VariableId v) const {
    auto it = series.find(v);
    if (it == series.end()) return nullptr;
    return std::get_if<EventSeries>(&it->second);
}

const UniformSeries* PatientRecord::uniform(VariableId v) const {
    auto it = series.find(v);
    if (it == series.end()) return nullptr;
    return std::get_if<UniformSeries>(&it->second);
}

UniformSeries resample(const EventSeries& events, const GridSpec& grid,
                       Aggregation aggregation) {
    if (grid.step_s <= 0) throw std::invalid_argument("resample: step_s must be positive");
    events.validate();

    UniformSeries out;
    out.variable = events.variable;
    out.start = grid.start;
    out.step_s = grid.step_s;
    out.values.assign(grid.n, aggregation == Aggregation::sum ? 0.0 : kGap);

    std::vector<std::size_t> counts(grid.n, 0);
    for (const Event& e : events.events) {
        const std::int64_t off = e.time - grid.start;
        if (off < 0) continue;
        const std::size_t bin = static_cast<std::size_t>(off / grid.step_s);
        if (bin >= grid.n) continue;
        switch (aggregation) {
            case Aggregation::sum:
                out.values[bin] += e.value;
                break;
            case Aggregation::mean:
                out.values[bin] = counts[bin] == 0 ? e.value : out.values[bin] + e.value;
                ++counts[bin];
                break;
            case Aggregation::last:
                out.values[bin] = e.value;
                break;
        }
    }
    if (aggregation == Aggregation::mean) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            if (counts[i] > 0) out.values[i] /= static_cast<double>(counts[i]);
        }
    }
    return out;
}

UniformSeries interpolate_gaps(const UniformSeries& s, int max_gap_steps) {
    UniformSeries out = s;
    const std::size_t n = out.values.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_gap(out.values[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_gap(out.values[j])) ++j;
        const std::size_t run = j - i;
        // Interior runs only: both anchors must exist.
        if (i > 0 && j < n && run <= static_cast<std::size_t>(max_gap_steps)) {
            const double left = out.values[i - 1];
            const double right = out.values[j];
            for (std::size_t k = 0; k < run; ++k) {
                const double frac = static_cast<double>(k + 1) /
                                    static_cast<double>(run + 1);
                out.values[i + k] = left + (right - left) * frac;
            }
        }
        i = j;
    }
    return out;
}

std::vector<UniformSeries> fill_gaps(const UniformSeries& s, int max_gap_steps) {
    const UniformSeries filled = interpolate_gaps(s, max_gap_steps);
    std::vector<UniformSeries> segments;
    const std::size_t n = filled.values.size();
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_gap(filled.values[i])) ++i;
        if (i >= n) break;
        std::size_t j = i;
        while (j < n && !is_gap(filled.values[j])) ++j;
        UniformSeries seg;
        seg.variable = filled.variable;
        seg.step_s = filled.step_s;
        seg.start = filled.time_at(i);
        seg.values.assign(filled.values.begin() + i, filled.values.begin() + j);
        segments.push_back(std::move(seg));
        i = j;
    }
    return segments;
}

UniformSeries downsample(const UniformSeries& s, int factor) {
    if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
    if (factor == 1) return s;
    UniformSeries out;
    out.variable = s.variable;
    out.start = s.start;
    out.step_s = s.step_s * factor;
    out.values.reserve((s.values.size() + factor - 1) / factor);
    for (std::size_t i = 0; i < s.values.size(); i += factor) {
        out.values.push_back(s.values[i]);
    }
    return out;
}

namespace {

// Re-bins an already-uniform series onto a target grid by treating its
// non-gap samples as timestamped events.
EventSeries uniform_to_events(const UniformSeries& s) {
    EventSeries ev;
    ev.variable = s.variable;
    ev.events.reserve(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!is_gap(s.values[i])) ev.events.push_back({s.time_at(i), s.values[i]});
    }
    return ev;
}

Aggregation aggregation_for(VariableId v) {
    if (is_dose_like(v)) return Aggregation::sum;
    if (is_state_like(v)) return Aggregation::last;
    return Aggregation::mean;
}

} // namespace

std::map<VariableId, UniformSeries> align(const PatientRecord& record,
                                          std::int64_t step_s) {
    if (step_s <= 0) throw std::invalid_argument("align: step_s must be positive");
    if (record.series.empty()) throw std::invalid_argument("align: empty record");
    if (!record.has(VariableId::glucose)) {
        throw MissingVariableError("align: record '" + record.patient_id +
                                   "' has no glucose series");
    }

    // Grid span: intersection of the uniform members' spans, clipped to the
    // record span. Event series are sparse doses and do not narrow the span.
    Timestamp lo = record.span_start;
    Timestamp hi = record.span_end;
    for (const auto& [var, data] : record.series) {
        if (const auto* u = std::get_if<UniformSeries>(&data)) {
            lo = std::max(lo, u->start);
            hi = std::min(hi, u->end());
        }
    }
    if (!(lo < hi)) throw std::invalid_argument("align: empty span intersection");

    GridSpec grid{lo, step_s,
                  static_cast<std::size_t>((hi - lo) / step_s)};
    if (grid.n == 0) throw std::invalid_argument("align: span shorter than one step");

    std::map<VariableId, UniformSeries> out;
    for (const auto& [var, data] : record.series) {
        const Aggregation agg = aggregation_for(var);
        if (const auto* ev = std::get_if<EventSeries>(&data)) {
            out[var] = resample(*ev, grid, agg);
        } else {
            const auto& u = std::get<UniformSeries>(data);
            if (u.start == grid.start && u.step_s == grid.step_s &&
                u.values.size() >= grid.n) {
                UniformSeries clipped = u;
                clipped.values.resize(grid.n);
                out[var] = std::move(clipped);
            } else {
                out[var] = resample(uniform_to_events(u), grid, agg);
            }
        }
        out[var].variable = var;
    }
    return out;
}

SupervisedSet embed(const std::map<VariableId, UniformSeries>& aligned,
                    const std::vector<LagFeature>& columns, int horizon_steps) {
    if (horizon_steps < 1) throw std::invalid_argument("embed: horizon_steps must be >= 1");
    if (columns.empty()) throw std::invalid_argument("embed: no columns");
    auto glu_it = aligned.find(VariableId::glucose);
    if (glu_it == aligned.end()) {
        throw MissingVariableError("embed: aligned map has no glucose");
    }
    const UniformSeries& glucose = glu_it->second;
    const std::size_t len = glucose.values.size();

    int max_lag = 0;
    for (const LagFeature& c : columns) {
        if (c.lag_steps < 1) throw std::invalid_argument("embed: lag_steps must be >= 1");
        max_lag = std::max(max_lag, c.lag_steps);
        auto it = aligned.find(c.variable);
        if (it == aligned.end()) {
            throw MissingVariableError("embed: missing variable " +
                                       std::string(to_string(c.variable)));
        }
        if (it->second.values.size() != len ||
            it->second.start != glucose.start ||
            it->second.step_s != glucose.step_s) {
            throw std::invalid_argument("embed: series are not on one grid");
        }
    }
    if (static_cast<std::size_t>(max_lag + horizon_steps) >= len) {
        throw EmptySetError("embed: max lag + horizon >= series length");
    }

    SupervisedSet set;
    set.step_s = glucose.step_s;
    set.horizon_steps = horizon_steps;
    set.columns = columns;

    const std::size_t t_lo = static_cast<std::size_t>(max_lag);
    const std::size_t t_hi = len - static_cast<std::size_t>(horizon_steps);
    std::vector<double> row(columns.size());
    std::vector<double> xs;
    xs.reserve((t_hi - t_lo) * columns.size());
    for (std::size_t t = t_lo; t < t_hi; ++t) {
        const double target = glucose.values[t + horizon_steps];
        if (is_gap(target)) continue;
        bool ok = true;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto& vals = aligned.at(columns[j].variable).values;
            const double v = vals[t - columns[j].lag_steps];
            if (is_gap(v)) {
                ok = false;
                break;
            }
            row[j] = v;
        }
        if (!ok) continue;
        xs.insert(xs.end(), row.begin(), row.end());
        set.y.push_back(target);
        set.row_times.push_back(glucose.time_at(t));
    }
    if (set.y.empty()) throw EmptySetError("embed: no gap-free rows");

    set.X.rows = set.y.size();
    set.X.cols = columns.size();
    set.X.data = std::move(xs);
    return set;
}

} // namespace glycast
