#ifndef GLYCAST_FEATURES_HPP
#define GLYCAST_FEATURES_HPP

#include <map>
#include <vector>

#include "glycast/onboard.hpp"
#include "glycast/series_ops.hpp"

namespace glycast {

enum class FeatureMode { univariate_glucose, multivariate, multivariate_onboard };

const char* to_string(FeatureMode mode);
FeatureMode parse_feature_mode(const std::string& name);

struct KernelSet {
    Kernel insulin = Kernel::insulin_default();
    Kernel carbs = Kernel::carbs_default();
    Kernel exercise = Kernel::exercise_default();
};

/// Aligns the record onto a step_s grid and assembles the channels for the
/// requested mode:
///   univariate_glucose    -> {glucose}
///   multivariate          -> every aligned channel as recorded
///   multivariate_onboard  -> glucose + smartband channels, with the event
///                            channels replaced by their on-board transforms
///                            (insulin_bolus->iob, carbs->cob, exercise->eob)
std::map<VariableId, UniformSeries> make_feature_series(
    const PatientRecord& record, std::int64_t step_s, FeatureMode mode,
    const KernelSet& kernels = {});

/// lags 1..lags_for(variable) for every channel present, glucose first.
std::vector<LagFeature> lag_columns(
    const std::map<VariableId, UniformSeries>& channels,
    const std::map<VariableId, int>& max_lag_steps);

/// Same lag count for every channel.
std::vector<LagFeature> lag_columns(
    const std::map<VariableId, UniformSeries>& channels, int lags);

/// Converts an exercise intensity series into per-sample micro events with
/// magnitude intensity * step minutes, suitable for the on-board transform.
EventSeries exercise_events(const UniformSeries& intensity);

/// Feature map -> supervised set for one record: aligns, interpolates small
/// gaps on level-like channels, lag-embeds. Columns take per-variable lag
/// caps when given, otherwise `lags` for every channel.
SupervisedSet build_supervised(const PatientRecord& record, std::int64_t step_s,
                               FeatureMode mode, const KernelSet& kernels,
                               const std::map<VariableId, int>& max_lag_steps,
                               int horizon_steps, std::int64_t max_gap_interp_s);

/// Row-wise concatenation; all sets must share columns, step and horizon.
SupervisedSet concat_sets(const std::vector<SupervisedSet>& sets);

} // namespace glycast

#endif
