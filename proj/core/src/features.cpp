#include "glycast/features.hpp"

#include <limits>
#include <stdexcept>

namespace glycast {

const char* to_string(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::univariate_glucose: return "univariate_glucose";
        case FeatureMode::multivariate: return "multivariate";
        case FeatureMode::multivariate_onboard: return "multivariate_onboard";
    }
    return "?";
}

FeatureMode parse_feature_mode(const std::string& name) {
    if (name == "univariate_glucose" || name == "univariate") {
        return FeatureMode::univariate_glucose;
    }
    if (name == "multivariate") return FeatureMode::multivariate;
    if (name == "multivariate_onboard" || name == "onboard") {
        return FeatureMode::multivariate_onboard;
    }
    throw std::invalid_argument("unknown feature mode '" + name + "'");
}

EventSeries exercise_events(const UniformSeries& intensity) {
    EventSeries ev;
    ev.variable = VariableId::exercise;
    const double step_min = static_cast<double>(intensity.step_s) / 60.0;
    for (std::size_t i = 0; i < intensity.values.size(); ++i) {
        const double v = intensity.values[i];
        if (!is_gap(v) && v > 0.0) {
            ev.events.push_back({intensity.time_at(i), v * step_min});
        }
    }
    return ev;
}

namespace {

// Sum of each factor-block; dose totals survive coarsening.
UniformSeries block_sum(const UniformSeries& s, int factor, std::size_t n_out) {
    UniformSeries out;
    out.variable = s.variable;
    out.start = s.start;
    out.step_s = s.step_s * factor;
    out.values.assign(n_out, 0.0);
    for (std::size_t i = 0; i < n_out; ++i) {
        double acc = 0.0;
        for (int j = 0; j < factor; ++j) {
            const double v = s.values[i * factor + j];
            if (!is_gap(v)) acc += v;
        }
        out.values[i] = acc;
    }
    return out;
}

// Coarser grids are reached by decimation (every factor-th sample), the way
// a sensor at a lower sampling frequency would report, not by averaging;
// dose channels block-sum so no delivery is lost.
std::map<VariableId, UniformSeries> align_decimated(const PatientRecord& record,
                                                    std::int64_t native_step,
                                                    int factor) {
    auto fine = align(record, native_step);
    std::size_t n_out = std::numeric_limits<std::size_t>::max();
    for (const auto& [var, s] : fine) {
        n_out = std::min(n_out, s.values.size() / static_cast<std::size_t>(factor));
    }
    std::map<VariableId, UniformSeries> out;
    for (auto& [var, s] : fine) {
        UniformSeries coarse =
            is_dose_like(var) ? block_sum(s, factor, n_out) : downsample(s, factor);
        coarse.values.resize(n_out);
        out[var] = std::move(coarse);
    }
    return out;
}

} // namespace

std::map<VariableId, UniformSeries> make_feature_series(
    const PatientRecord& record, std::int64_t step_s, FeatureMode mode,
    const KernelSet& kernels) {
    const UniformSeries* native = record.uniform(VariableId::glucose);
    std::map<VariableId, UniformSeries> aligned;
    if (native != nullptr && step_s > native->step_s &&
        step_s % native->step_s == 0) {
        aligned = align_decimated(record, native->step_s,
                                  static_cast<int>(step_s / native->step_s));
    } else {
        aligned = align(record, step_s);
    }

    if (mode == FeatureMode::univariate_glucose) {
        std::map<VariableId, UniformSeries> out;
        out[VariableId::glucose] = aligned.at(VariableId::glucose);
        return out;
    }
    if (mode == FeatureMode::multivariate) return aligned;

    // multivariate_onboard
    const GridSpec grid = aligned.at(VariableId::glucose).grid();
    std::map<VariableId, UniformSeries> out;
    for (const auto& [var, s] : aligned) {
        switch (var) {
            case VariableId::insulin_bolus:
            case VariableId::carbs:
            case VariableId::exercise:
                break;  // replaced by on-board features below
            default:
                out[var] = s;
        }
    }
    if (const auto* bolus = record.events(VariableId::insulin_bolus)) {
        out[VariableId::iob] = onboard(*bolus, kernels.insulin, grid);
    }
    if (const auto* meals = record.events(VariableId::carbs)) {
        out[VariableId::cob] = onboard(*meals, kernels.carbs, grid);
    }
    if (auto it = aligned.find(VariableId::exercise); it != aligned.end()) {
        out[VariableId::eob] =
            onboard(exercise_events(it->second), kernels.exercise, grid);
    }
    return out;
}

std::vector<LagFeature> lag_columns(
    const std::map<VariableId, UniformSeries>& channels,
    const std::map<VariableId, int>& max_lag_steps) {
    std::vector<LagFeature> cols;
    auto add = [&](VariableId v) {
        auto it = max_lag_steps.find(v);
        if (it == max_lag_steps.end() || it->second < 1) return;
        for (int lag = 1; lag <= it->second; ++lag) cols.push_back({v, lag});
    };
    // Glucose first, then the rest in enum order.
    if (channels.count(VariableId::glucose)) add(VariableId::glucose);
    for (const auto& [var, s] : channels) {
        if (var != VariableId::glucose) add(var);
    }
    return cols;
}

std::vector<LagFeature> lag_columns(
    const std::map<VariableId, UniformSeries>& channels, int lags) {
    std::map<VariableId, int> per_var;
    for (const auto& [var, s] : channels) per_var[var] = lags;
    return lag_columns(channels, per_var);
}

SupervisedSet build_supervised(const PatientRecord& record, std::int64_t step_s,
                               FeatureMode mode, const KernelSet& kernels,
                               const std::map<VariableId, int>& max_lag_steps,
                               int horizon_steps, std::int64_t max_gap_interp_s) {
    auto channels = make_feature_series(record, step_s, mode, kernels);
    const int max_gap = static_cast<int>(max_gap_interp_s / step_s);
    for (auto& [var, series] : channels) {
        if (is_level_like(var)) series = interpolate_gaps(series, max_gap);
    }
    const auto columns = lag_columns(channels, max_lag_steps);
    return embed(channels, columns, horizon_steps);
}

SupervisedSet concat_sets(const std::vector<SupervisedSet>& sets) {
    if (sets.empty()) throw std::invalid_argument("concat_sets: nothing to pool");
    SupervisedSet out;
    out.step_s = sets[0].step_s;
    out.horizon_steps = sets[0].horizon_steps;
    out.columns = sets[0].columns;
    std::size_t total = 0;
    for (const auto& s : sets) {
        if (s.columns != out.columns || s.step_s != out.step_s ||
            s.horizon_steps != out.horizon_steps) {
            throw std::invalid_argument("concat_sets: mismatched sets");
        }
        total += s.n_rows();
    }
    out.X = Matrix(total, out.columns.size());
    out.y.reserve(total);
    out.row_times.reserve(total);
    std::size_t at = 0;
    for (const auto& s : sets) {
        std::copy(s.X.data.begin(), s.X.data.end(), out.X.row(at));
        out.y.insert(out.y.end(), s.y.begin(), s.y.end());
        out.row_times.insert(out.row_times.end(), s.row_times.begin(),
                             s.row_times.end());
        at += s.n_rows();
    }
    return out;
}

} // namespace glycast
