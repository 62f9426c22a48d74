#include <numeric>
#include <stdexcept>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"
#include "linalg.hpp"

namespace glycast {

RidgeModel::RidgeModel(std::vector<LagFeature> columns, std::int64_t step_s,
                       int horizon_steps, double lambda,
                       std::vector<double> feature_mean,
                       std::vector<double> feature_sd, double y_mean,
                       std::vector<double> weights_std)
    : lambda_(lambda),
      mean_(std::move(feature_mean)),
      sd_(std::move(feature_sd)),
      y_mean_(y_mean),
      w_(std::move(weights_std)) {
    columns_ = std::move(columns);
    step_s_ = step_s;
    horizon_steps_ = horizon_steps;
    if (mean_.size() != columns_.size() || sd_.size() != columns_.size() ||
        w_.size() != columns_.size()) {
        throw std::invalid_argument("ridge: inconsistent sizes");
    }
}

double RidgeModel::predict_row(std::span<const double> row) const {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument("ridge: row/column mismatch");
    }
    double acc = y_mean_;
    for (std::size_t j = 0; j < w_.size(); ++j) {
        acc += w_[j] * (row[j] - mean_[j]) / sd_[j];
    }
    return acc;
}

std::vector<double> RidgeModel::weights_raw() const {
    std::vector<double> raw(w_.size());
    for (std::size_t j = 0; j < w_.size(); ++j) raw[j] = w_[j] / sd_[j];
    return raw;
}

std::unique_ptr<TrainedModel> fit_ridge(const ForecasterSpec& spec,
                                        const SupervisedSet& train) {
    const std::size_t n = train.n_rows();
    const std::size_t k = train.n_features();
    if (n == 0) throw EmptySetError("ridge: empty training set");
    if (spec.ridge_lambda == 0.0 && n < k) {
        throw DegenerateInputError("ridge: fewer rows than features with lambda = 0");
    }

    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<int> cols(k);
    std::iota(cols.begin(), cols.end(), 0);

    const auto stats = linalg::column_stats(train.X, rows, cols);
    const double y_mean = linalg::mean_of(train.y, rows);
    auto w = linalg::ridge_standardized(train.X, train.y, rows, cols, stats,
                                        y_mean, spec.ridge_lambda);
    return std::make_unique<RidgeModel>(train.columns, train.step_s,
                                        train.horizon_steps, spec.ridge_lambda,
                                        stats.mean, stats.sd, y_mean, std::move(w));
}

} // namespace glycast
