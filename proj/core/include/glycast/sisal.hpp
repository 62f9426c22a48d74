#ifndef GLYCAST_SISAL_HPP
#define GLYCAST_SISAL_HPP

#include <cstdint>
#include <iosfwd>
#include <map>

#include "glycast/series_ops.hpp"

namespace glycast {

/// Sequential input selection: backward elimination over lagged inputs
/// driven by resampled linear-model weight distributions.
struct SelectionConfig {
    std::map<VariableId, int> max_lag_steps;  // candidates: lags 1..max per variable
    int resamples = 100;                      // B
    double train_fraction = 0.7;
    double q_low = 0.165;                     // ~ +-1 sigma quantile pair
    double q_high = 0.835;
    double ridge_lambda = 1e-3;
    double sparsity_tolerance = 0.05;
    std::uint64_t seed = 0;
    std::size_t max_rows = 0;  // 0 = all rows; else seeded row subsample

    void validate() const;
};

/// Per-resample weights for the active features plus validation errors.
struct WeightSamples {
    Matrix std_weights;  // B x k, standardized feature space
    Matrix raw_weights;  // B x k, back-transformed to raw units
    std::vector<double> val_mse;  // B
};

struct FeatureStat {
    LagFeature feature;
    double median = 0.0;  // standardized-space weight median
    double width = 0.0;   // q_high - q_low spread
    double score = 0.0;   // |median| / width
};

struct SelectionResult {
    std::int64_t step_s = 300;
    std::vector<LagFeature> removal_order;  // first removed = least influential
    std::vector<LagFeature> selected_set;
    std::vector<double> validation_curve;   // mean val MSE, one per elimination step
    std::vector<std::size_t> active_counts; // active features per curve entry
    std::size_t selected_step = 0;          // index into validation_curve
    std::vector<FeatureStat> weight_stats;  // at the last step each feature was active
    std::vector<VariableId> variable_ranking;
    std::map<VariableId, std::int64_t> influence_duration_s;
};

/// Ridge weights over B train/validation resamples of the active features.
/// Splits are without replacement; features are standardized on train
/// statistics. Per-resample seeds derive from (seed, step_index, b), so
/// parallel and serial runs agree exactly.
/// Throws DegenerateInputError when rows <= |active| + 1.
WeightSamples resampled_weights(const SupervisedSet& set,
                                const std::vector<LagFeature>& active,
                                const SelectionConfig& config,
                                std::uint64_t step_index = 0,
                                unsigned workers = 1);

/// Full backward elimination. Candidates are the set's columns; the caller
/// builds them (all lags 1..max_lag per variable, see lag_columns()).
SelectionResult sisal(const SupervisedSet& set, const SelectionConfig& config,
                      unsigned workers = 1);

/// duration(v) = step_s * max retained lag of v, 0 when nothing is retained.
std::map<VariableId, std::int64_t> influence_durations(
    const SelectionResult& result, std::int64_t step_s);

/// One JSON record per elimination step.
void write_selection_jsonl(const SelectionResult& result, std::ostream& out);
/// Summary CSV: variable,rank,influence_minutes.
void write_selection_csv(const SelectionResult& result, std::ostream& out);

} // namespace glycast

#endif
