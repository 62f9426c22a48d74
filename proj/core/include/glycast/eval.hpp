#ifndef GLYCAST_EVAL_HPP
#define GLYCAST_EVAL_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "glycast/features.hpp"
#include "glycast/models.hpp"

namespace glycast {

struct SplitSpec {
    int train_days = 10;
    int test_days = 4;
};

/// Walk-forward experiment grid over model x sampling period x history
/// length x horizon. Defaults mirror the toolkit's standard study.
struct EvalConfig {
    std::vector<ForecasterSpec> models;  // empty -> defaults()
    std::vector<std::int64_t> step_s_options = {300, 600, 900};
    std::vector<int> history_hours = {3, 6, 12};
    std::vector<int> horizon_minutes = {15, 30, 45, 60};
    SplitSpec split;
    FeatureMode feature_mode = FeatureMode::univariate_glucose;
    KernelSet kernels;
    std::int64_t max_gap_interp_s = 1800;  // gaps up to 30 min interpolated
    std::uint64_t seed = 0;
    unsigned workers = 1;

    void validate() const;
    static EvalConfig defaults();
};

struct EvalRow {
    std::string patient_id;
    std::string model;
    std::int64_t step_s = 0;
    int history_h = 0;
    int horizon_min = 0;
    std::size_t n_predictions = 0;
    double rmse = 0.0;
    double mae = 0.0;
    std::string error;  // empty for ok rows

    bool ok() const { return error.empty(); }
};

/// Root mean squared error / mean absolute error, mg/dL. Lengths must match
/// and be >= 1.
double rmse(std::span<const double> pred, std::span<const double> actual);
double mae(std::span<const double> pred, std::span<const double> actual);

/// One cell: day-blocked split, model fitted on train-day rows only, one
/// prediction per valid test row. A leakage guard asserts that every train
/// target precedes every test feature. Throws EmptySetError when no test
/// row remains.
EvalRow walk_forward(const PatientRecord& record, const ForecasterSpec& spec,
                     std::int64_t step_s, int history_h, int horizon_min,
                     const EvalConfig& config);

/// Full cross product over the cohort; per-cell failures become error rows.
/// Rows come back in deterministic grid order for any worker count.
std::vector<EvalRow> run_grid(const std::vector<PatientRecord>& cohort,
                              const EvalConfig& config);

/// CSV schema: patient_id,model,step_s,history_h,horizon_min,n,rmse,mae.
/// Error rows carry n = 0 and empty rmse/mae fields; the JSONL mirror adds
/// the error message.
void write_eval_csv(const std::vector<EvalRow>& rows, std::ostream& out);
void write_eval_jsonl(const std::vector<EvalRow>& rows, std::ostream& out);
std::vector<EvalRow> read_eval_csv(std::istream& in, const std::string& name);

/// Aggregated report over the grid.
struct ReportCell {
    std::string model;
    std::int64_t step_s = 0;
    int history_h = 0;
    int horizon_min = 0;
    std::size_t n_patients = 0;
    double mean_rmse = 0.0;
    double sd_rmse = 0.0;
    double mean_mae = 0.0;
    bool beats_persistence = true;  // diagnostic flag (true when <=)
};

struct Report {
    std::vector<ReportCell> cells;       // deterministic order
    std::size_t best_cell = 0;           // index of lowest mean RMSE
    std::size_t n_error_rows = 0;

    std::string summary_csv() const;
    std::string long_csv() const;        // plot-ready long format
    std::string text_table() const;      // aligned, best cell highlighted
};

Report report(const std::vector<EvalRow>& rows);

} // namespace glycast

#endif
