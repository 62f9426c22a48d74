#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"

namespace glycast {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::persistence: return "persistence";
        case ModelKind::ridge: return "ridge";
        case ModelKind::arima: return "arima";
        case ModelKind::rf: return "rf";
        case ModelKind::svr: return "svr";
    }
    return "?";
}

void ForecasterSpec::validate() const {
    switch (kind) {
        case ModelKind::persistence:
            break;
        case ModelKind::ridge:
            if (ridge_lambda < 0.0) throw std::invalid_argument("ridge: lambda >= 0");
            break;
        case ModelKind::arima:
            if (p < 0 || p > 5 || q < 0 || q > 5 || d < 0 || d > 2) {
                throw std::invalid_argument("arima: need p,q in [0,5], d in [0,2]");
            }
            break;
        case ModelKind::rf:
            if (n_trees < 1) throw std::invalid_argument("rf: n_trees >= 1");
            if (min_leaf < 1) throw std::invalid_argument("rf: min_leaf >= 1");
            if (mtry < 0 || max_depth < 0) throw std::invalid_argument("rf: negative option");
            break;
        case ModelKind::svr:
            if (!(svr_c > 0.0)) throw std::invalid_argument("svr: C > 0");
            if (svr_epsilon < 0.0) throw std::invalid_argument("svr: epsilon >= 0");
            if (svr_gamma < 0.0) throw std::invalid_argument("svr: gamma >= 0");
            if (!(svr_tol > 0.0)) throw std::invalid_argument("svr: tol > 0");
            if (svr_max_iter < 1) throw std::invalid_argument("svr: max_iter >= 1");
            break;
    }
}

std::string ForecasterSpec::name() const {
    if (kind == ModelKind::arima && !auto_order) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "arima(%d,%d,%d)", p, d, q);
        return buf;
    }
    return to_string(kind);
}

ForecasterSpec ForecasterSpec::parse(const std::string& text) {
    ForecasterSpec spec;
    if (text == "persistence") {
        spec.kind = ModelKind::persistence;
    } else if (text == "ridge") {
        spec.kind = ModelKind::ridge;
    } else if (text == "rf") {
        spec.kind = ModelKind::rf;
    } else if (text == "svr") {
        spec.kind = ModelKind::svr;
    } else if (text == "arima") {
        spec.kind = ModelKind::arima;
        spec.auto_order = true;
    } else if (text.rfind("arima(", 0) == 0 && text.back() == ')') {
        spec.kind = ModelKind::arima;
        if (std::sscanf(text.c_str(), "arima(%d,%d,%d)", &spec.p, &spec.d,
                        &spec.q) != 3) {
            throw std::invalid_argument("bad arima spec '" + text + "'");
        }
    } else {
        throw std::invalid_argument("unknown model '" + text + "'");
    }
    spec.validate();
    return spec;
}

double TrainedModel::predict_row(std::span<const double>) const {
    throw std::logic_error(std::string(to_string(kind())) +
                           " does not predict from feature rows");
}

double TrainedModel::forecast_recursive(std::span<const double>, int) const {
    throw std::logic_error(std::string(to_string(kind())) +
                           " does not forecast recursively");
}

Forecast predict(const TrainedModel& model, std::span<const double> row,
                 Timestamp origin) {
    return {model.predict_row(row),
            origin + static_cast<std::int64_t>(model.horizon_steps()) * model.step_s()};
}

PersistenceModel::PersistenceModel(std::vector<LagFeature> columns,
                                   std::int64_t step_s, int horizon_steps) {
    columns_ = std::move(columns);
    step_s_ = step_s;
    horizon_steps_ = horizon_steps;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].variable == VariableId::glucose && columns_[j].lag_steps == 1) {
            lag1_col_ = static_cast<int>(j);
            break;
        }
    }
    if (lag1_col_ < 0) {
        throw std::invalid_argument("persistence: needs a glucose lag-1 column");
    }
}

double PersistenceModel::predict_row(std::span<const double> row) const {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument("persistence: row/column mismatch");
    }
    return row[static_cast<std::size_t>(lag1_col_)];
}

} // namespace glycast
