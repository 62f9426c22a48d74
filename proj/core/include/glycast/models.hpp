#ifndef GLYCAST_MODELS_HPP
#define GLYCAST_MODELS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "glycast/series_ops.hpp"

namespace glycast {

enum class ModelKind { persistence, ridge, arima, rf, svr };

const char* to_string(ModelKind kind);

/// Model family plus hyperparameters. Defaults follow the toolkit's
/// documented choices; zero-valued mtry/gamma mean "derive from feature
/// count at fit time" (ceil(p/3) and 1/p respectively).
struct ForecasterSpec {
    ModelKind kind = ModelKind::persistence;

    // ridge
    double ridge_lambda = 1e-3;

    // arima
    int p = 1, d = 0, q = 0;
    bool auto_order = false;  // AIC grid over p,q in [0,3], d in {0,1}

    // random forest
    int n_trees = 100;
    int mtry = 0;
    int min_leaf = 5;
    int max_depth = 0;  // 0 = unbounded
    std::uint64_t seed = 0;

    // epsilon-SVR (RBF); epsilon is in standardized target units
    double svr_c = 10.0;
    double svr_epsilon = 0.1;
    double svr_gamma = 0.0;
    double svr_tol = 1e-3;
    long svr_max_iter = 2'000'000;

    void validate() const;
    std::string name() const;  // "rf", "svr", "arima(2,1,1)", ...

    /// Parses "persistence", "ridge", "rf", "svr", "arima" (AIC order) or
    /// "arima(p,d,q)". Throws std::invalid_argument on unknown names.
    static ForecasterSpec parse(const std::string& text);
};

struct Forecast {
    double value_mg_dl = 0.0;
    Timestamp target_time;
};

/// Immutable fitted forecaster. Regression kinds predict from one feature
/// row matching columns(); ARIMA forecasts recursively from a glucose level
/// history. predict* members are pure and thread-safe.
class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    virtual ModelKind kind() const = 0;

    /// Direct prediction at the trained horizon from one feature row.
    /// Throws std::logic_error for history-based models (arima).
    virtual double predict_row(std::span<const double> row) const;

    /// Recursive h-step forecast from a chronological gap-free level history.
    /// Throws std::logic_error for row-based models.
    virtual double forecast_recursive(std::span<const double> history, int h) const;

    const std::vector<LagFeature>& columns() const { return columns_; }
    std::int64_t step_s() const { return step_s_; }
    int horizon_steps() const { return horizon_steps_; }

protected:
    std::vector<LagFeature> columns_;
    std::int64_t step_s_ = 300;
    int horizon_steps_ = 1;
};

/// Convenience wrapper stamping the target time.
Forecast predict(const TrainedModel& model, std::span<const double> row,
                 Timestamp origin);

/// Fits persistence / ridge / rf / svr on a supervised set. `workers` caps
/// internal parallelism (forest trees). Throws on empty input; SVR throws
/// ConvergenceError when SMO exhausts max_iter.
std::unique_ptr<TrainedModel> fit(const ForecasterSpec& spec,
                                  const SupervisedSet& train,
                                  unsigned workers = 1);

/// Fits ARIMA(p,d,q) on a gap-free level series by conditional sum of
/// squares (AR-only in closed form, otherwise Nelder-Mead with
/// stationarity/invertibility rejection).
std::unique_ptr<TrainedModel> fit_arima(const UniformSeries& series, int p,
                                        int d, int q);
std::unique_ptr<TrainedModel> fit_arima(std::span<const double> levels,
                                        std::int64_t step_s, int p, int d, int q);

/// AIC order selection over p,q in [0,max_pq], d in {0,1}.
std::unique_ptr<TrainedModel> fit_arima_auto(std::span<const double> levels,
                                             std::int64_t step_s, int max_pq = 3);

/// Versioned JSON persistence; load refuses unknown versions or kinds.
void save_model(const TrainedModel& model, std::ostream& out);
void save_model(const TrainedModel& model, const std::string& path);
std::unique_ptr<TrainedModel> load_model(std::istream& in);
std::unique_ptr<TrainedModel> load_model(const std::string& path);

// ---- concrete models (exposed for tests and serialization) ----

class PersistenceModel final : public TrainedModel {
public:
    PersistenceModel(std::vector<LagFeature> columns, std::int64_t step_s,
                     int horizon_steps);
    ModelKind kind() const override { return ModelKind::persistence; }
    double predict_row(std::span<const double> row) const override;
    int glucose_lag1_column() const { return lag1_col_; }

private:
    int lag1_col_ = -1;
};

class RidgeModel final : public TrainedModel {
public:
    RidgeModel(std::vector<LagFeature> columns, std::int64_t step_s,
               int horizon_steps, double lambda,
               std::vector<double> feature_mean, std::vector<double> feature_sd,
               double y_mean, std::vector<double> weights_std);
    ModelKind kind() const override { return ModelKind::ridge; }
    double predict_row(std::span<const double> row) const override;

    double lambda() const { return lambda_; }
    const std::vector<double>& weights_std() const { return w_; }
    const std::vector<double>& feature_mean() const { return mean_; }
    const std::vector<double>& feature_sd() const { return sd_; }
    double y_mean() const { return y_mean_; }
    /// Raw-space weights (standardization folded in).
    std::vector<double> weights_raw() const;

private:
    double lambda_;
    std::vector<double> mean_, sd_;
    double y_mean_;
    std::vector<double> w_;
};

class ForestModel final : public TrainedModel {
public:
    struct Node {
        int feature = -1;      // -1 marks a leaf
        double threshold = 0;  // go left when x[feature] <= threshold
        double value = 0;      // leaf mean
        int left = -1, right = -1;
    };

    ForestModel(std::vector<LagFeature> columns, std::int64_t step_s,
                int horizon_steps, std::vector<std::vector<Node>> trees,
                double y_min, double y_max);
    ModelKind kind() const override { return ModelKind::rf; }
    double predict_row(std::span<const double> row) const override;

    const std::vector<std::vector<Node>>& trees() const { return trees_; }
    double train_target_min() const { return y_min_; }
    double train_target_max() const { return y_max_; }

private:
    std::vector<std::vector<Node>> trees_;
    double y_min_, y_max_;
};

class SvrModel final : public TrainedModel {
public:
    SvrModel(std::vector<LagFeature> columns, std::int64_t step_s,
             int horizon_steps, double gamma,
             std::vector<double> feature_mean, std::vector<double> feature_sd,
             double y_mean, double y_sd, Matrix support_std,
             std::vector<double> beta, double bias_std,
             double final_kkt_violation, long iterations);
    ModelKind kind() const override { return ModelKind::svr; }
    double predict_row(std::span<const double> row) const override;

    std::size_t n_support() const { return beta_.size(); }
    const Matrix& support_vectors_std() const { return sv_; }
    const std::vector<double>& beta() const { return beta_; }  // alpha - alpha*
    double bias_std() const { return bias_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& feature_mean() const { return mean_; }
    const std::vector<double>& feature_sd() const { return sd_; }
    double y_mean() const { return y_mean_; }
    double y_sd() const { return y_sd_; }
    double final_kkt_violation() const { return kkt_; }
    long iterations() const { return iters_; }

    /// Decision value in standardized space for a standardized input row.
    double decision_std(std::span<const double> x_std) const;

private:
    double gamma_;
    std::vector<double> mean_, sd_;
    double y_mean_, y_sd_;
    Matrix sv_;  // n_support x p, standardized
    std::vector<double> beta_;
    double bias_;
    double kkt_;
    long iters_;
};

class ArimaModel final : public TrainedModel {
public:
    ArimaModel(std::int64_t step_s, int p, int d, int q,
               std::vector<double> phi, std::vector<double> theta,
               double intercept, double sigma2, double css, std::size_t n_obs);
    ModelKind kind() const override { return ModelKind::arima; }
    double forecast_recursive(std::span<const double> history, int h) const override;

    int p() const { return p_; }
    int d() const { return d_; }
    int q() const { return q_; }
    const std::vector<double>& phi() const { return phi_; }
    const std::vector<double>& theta() const { return theta_; }
    double intercept() const { return intercept_; }
    double sigma2() const { return sigma2_; }
    double css() const { return css_; }
    std::size_t n_obs() const { return n_obs_; }
    double aic() const;

private:
    int p_, d_, q_;
    std::vector<double> phi_, theta_;
    double intercept_;
    double sigma2_;
    double css_;
    std::size_t n_obs_;
};

} // namespace glycast

#endif
