#ifndef GLYCAST_SERIES_OPS_HPP
#define GLYCAST_SERIES_OPS_HPP

#include <compare>
#include <cstddef>
#include <map>
#include <vector>

#include "glycast/series.hpp"

namespace glycast {

enum class Aggregation { sum, mean, last };

/// One design-matrix column: variable value lagged by lag_steps grid steps.
/// lag_steps >= 1; the forecast origin itself is never a feature.
struct LagFeature {
    VariableId variable = VariableId::glucose;
    int lag_steps = 1;

    auto operator<=>(const LagFeature&) const = default;
};

/// Minimal row-major dense matrix; enough for design matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }
};

/// Lag-embedded design matrix with a horizon-shifted glucose target.
/// Row at origin time t: X[t][j] = series(columns[j].variable)[t - lag_j],
/// y[t] = glucose[t + horizon_steps]. No gaps inside X or y.
struct SupervisedSet {
    std::int64_t step_s = 300;
    int horizon_steps = 1;
    std::vector<LagFeature> columns;
    Matrix X;
    std::vector<double> y;
    std::vector<Timestamp> row_times;

    std::size_t n_rows() const { return y.size(); }
    std::size_t n_features() const { return columns.size(); }
    std::int64_t horizon_seconds() const { return horizon_steps * step_s; }
};

/// Bins events onto `grid`; bin i aggregates events with
/// grid.start + i*step <= t < grid.start + (i+1)*step.
/// Empty bins become 0 for sum and kGap for mean/last. Events outside the
/// grid span are ignored.
UniformSeries resample(const EventSeries& events, const GridSpec& grid,
                       Aggregation aggregation);

/// Splits on interior gap runs longer than max_gap_steps; shorter interior
/// runs are linearly interpolated. Leading/trailing gaps are trimmed. Every
/// returned segment is contiguous and gap-free.
std::vector<UniformSeries> fill_gaps(const UniformSeries& s, int max_gap_steps);

/// Same grid as the input: interior gap runs of length <= max_gap_steps are
/// linearly interpolated; longer runs (and edge runs) stay gaps.
UniformSeries interpolate_gaps(const UniformSeries& s, int max_gap_steps);

/// Keeps every factor-th value starting at index 0; step_s scales by factor.
UniformSeries downsample(const UniformSeries& s, int factor);

/// Puts every member series of the record onto one grid of step step_s:
/// dose-like variables by sum, level-like by mean, state-like by last.
/// The grid covers the intersection of the uniform members' spans (clipped
/// to the record span); event series are binned onto that grid.
/// Throws MissingVariableError when the record has no glucose series.
std::map<VariableId, UniformSeries> align(const PatientRecord& record,
                                          std::int64_t step_s);

/// Lag-embeds aligned series into a SupervisedSet. Rows whose features or
/// target touch a gap or the series boundary are dropped.
/// Throws EmptySetError when no valid row remains.
SupervisedSet embed(const std::map<VariableId, UniformSeries>& aligned,
                    const std::vector<LagFeature>& columns, int horizon_steps);

} // namespace glycast

#endif
