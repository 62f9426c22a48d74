#include "glycast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "glycast/errors.hpp"
#include "glycast/parallel.hpp"
#include "glycast/rng.hpp"

namespace glycast {

EvalConfig EvalConfig::defaults() {
    EvalConfig cfg;
    cfg.models = {ForecasterSpec::parse("persistence"),
                  ForecasterSpec::parse("rf"), ForecasterSpec::parse("svr")};
    return cfg;
}

void EvalConfig::validate() const {
    if (step_s_options.empty() || history_hours.empty() ||
        horizon_minutes.empty()) {
        throw std::invalid_argument("eval: empty grid axis");
    }
    for (const std::int64_t step : step_s_options) {
        if (step <= 0) throw std::invalid_argument("eval: step_s > 0");
        for (const int h : horizon_minutes) {
            if (h < 1) throw std::invalid_argument("eval: horizon >= 1 min");
        }
        for (const int hist : history_hours) {
            if ((static_cast<std::int64_t>(hist) * 3600) % step != 0) {
                throw std::invalid_argument("eval: history not divisible by step");
            }
        }
    }
    if (split.train_days < 1 || split.test_days < 1) {
        throw std::invalid_argument("eval: split days >= 1");
    }
    for (const auto& m : models) m.validate();
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) {
        throw std::invalid_argument("rmse: length mismatch");
    }
    if (pred.empty()) throw std::invalid_argument("rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) {
        throw std::invalid_argument("mae: length mismatch");
    }
    if (pred.empty()) throw std::invalid_argument("mae: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        acc += std::abs(pred[i] - actual[i]);
    }
    return acc / static_cast<double>(pred.size());
}

namespace {

SupervisedSet subset_rows(const SupervisedSet& set, const std::vector<std::size_t>& rows) {
    SupervisedSet out;
    out.step_s = set.step_s;
    out.horizon_steps = set.horizon_steps;
    out.columns = set.columns;
    out.X = Matrix(rows.size(), set.n_features());
    out.y.resize(rows.size());
    out.row_times.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(set.X.row(rows[i]), set.n_features(), out.X.row(i));
        out.y[i] = set.y[rows[i]];
        out.row_times[i] = set.row_times[rows[i]];
    }
    return out;
}

} // namespace

EvalRow walk_forward(const PatientRecord& record, const ForecasterSpec& spec,
                     std::int64_t step_s, int history_h, int horizon_min,
                     const EvalConfig& config) {
    EvalRow row;
    row.patient_id = record.patient_id;
    row.model = spec.name();
    row.step_s = step_s;
    row.history_h = history_h;
    row.horizon_min = horizon_min;

    const std::int64_t span_days =
        (record.span_end - record.span_start) / 86400;
    if (span_days < config.split.train_days + config.split.test_days) {
        throw std::invalid_argument("walk_forward: record shorter than train+test days");
    }
    // Horizons that are not whole steps round up to the next sample, the way
    // a coarse-sampled deployment realizes a 15-minute lead at a 10-minute
    // cadence (exact when divisible).
    const int horizon_steps = static_cast<int>(
        (static_cast<std::int64_t>(horizon_min) * 60 + step_s - 1) / step_s);
    const int lags =
        static_cast<int>(static_cast<std::int64_t>(history_h) * 3600 / step_s);

    auto channels = make_feature_series(record, step_s, config.feature_mode,
                                        config.kernels);
    const int max_gap_steps =
        static_cast<int>(config.max_gap_interp_s / step_s);
    for (auto& [var, series] : channels) {
        if (is_level_like(var)) {
            series = interpolate_gaps(series, max_gap_steps);
        }
    }

    const auto columns = lag_columns(channels, lags);
    const SupervisedSet set = embed(channels, columns, horizon_steps);

    // Day-blocked split: train targets stay strictly before every test
    // feature window.
    const Timestamp boundary =
        record.span_start + static_cast<std::int64_t>(config.split.train_days) * 86400;
    int max_lag = 0;
    for (const auto& c : columns) max_lag = std::max(max_lag, c.lag_steps);

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < set.n_rows(); ++i) {
        const Timestamp t = set.row_times[i];
        if (t + static_cast<std::int64_t>(horizon_steps) * step_s < boundary) {
            train_rows.push_back(i);
        } else if (t - static_cast<std::int64_t>(max_lag) * step_s >= boundary) {
            test_rows.push_back(i);
        }
    }
    if (train_rows.empty()) throw EmptySetError("walk_forward: no train rows");
    if (test_rows.empty()) throw EmptySetError("walk_forward: no test rows");

    // Leakage guard (internal assertion).
    {
        Timestamp max_train_target{std::numeric_limits<std::int64_t>::min()};
        for (const std::size_t i : train_rows) {
            max_train_target = std::max(
                max_train_target,
                set.row_times[i] + static_cast<std::int64_t>(horizon_steps) * step_s);
        }
        Timestamp min_test_feature{std::numeric_limits<std::int64_t>::max()};
        for (const std::size_t i : test_rows) {
            min_test_feature = std::min(
                min_test_feature,
                set.row_times[i] - static_cast<std::int64_t>(max_lag) * step_s);
        }
        if (!(max_train_target < min_test_feature)) {
            throw std::logic_error("walk_forward: leakage guard violated");
        }
    }

    const SupervisedSet train = subset_rows(set, train_rows);
    std::vector<double> pred(test_rows.size());
    std::vector<double> actual(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        actual[i] = set.y[test_rows[i]];
    }

    if (spec.kind == ModelKind::arima) {
        // Recursive univariate forecasts from each test row's glucose lag
        // window (chronological), matching the information set of the
        // regression models: history ends at t-1, target sits at t+h.
        std::vector<int> glu_cols(lags, -1);
        for (std::size_t j = 0; j < set.columns.size(); ++j) {
            const auto& c = set.columns[j];
            if (c.variable == VariableId::glucose && c.lag_steps <= lags) {
                glu_cols[static_cast<std::size_t>(c.lag_steps - 1)] =
                    static_cast<int>(j);
            }
        }
        for (int c : glu_cols) {
            if (c < 0) throw std::logic_error("walk_forward: missing glucose lag");
        }

        // Fit on the longest gap-free train-span glucose segment.
        UniformSeries train_glucose = channels.at(VariableId::glucose);
        const std::int64_t n_keep = (boundary - train_glucose.start) / step_s;
        if (n_keep < 1) throw EmptySetError("walk_forward: no train glucose");
        train_glucose.values.resize(std::min<std::size_t>(
            train_glucose.values.size(), static_cast<std::size_t>(n_keep)));
        const auto segments = fill_gaps(train_glucose, max_gap_steps);
        if (segments.empty()) throw EmptySetError("walk_forward: no train glucose");
        const auto longest = std::max_element(
            segments.begin(), segments.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });

        std::unique_ptr<TrainedModel> model;
        if (spec.auto_order) {
            model = fit_arima_auto(longest->values, step_s);
        } else {
            model = fit_arima(*longest, spec.p, spec.d, spec.q);
        }

        std::vector<double> history(lags);
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            const double* xrow = set.X.row(test_rows[i]);
            for (int l = 0; l < lags; ++l) {
                // lag L sits L steps before the origin.
                history[static_cast<std::size_t>(lags - l - 1)] =
                    xrow[glu_cols[static_cast<std::size_t>(l)]];
            }
            pred[i] = model->forecast_recursive(history, horizon_steps + 1);
        }
    } else {
        const auto model = fit(spec, train, 1);
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            pred[i] = model->predict_row(
                {set.X.row(test_rows[i]), set.n_features()});
        }
    }

    row.n_predictions = pred.size();
    row.rmse = rmse(pred, actual);
    row.mae = mae(pred, actual);
    return row;
}

std::vector<EvalRow> run_grid(const std::vector<PatientRecord>& cohort,
                              const EvalConfig& config) {
    config.validate();
    EvalConfig cfg = config;
    if (cfg.models.empty()) cfg.models = EvalConfig::defaults().models;

    struct Cell {
        const PatientRecord* record;
        ForecasterSpec spec;
        std::int64_t step_s;
        int history_h;
        int horizon_min;
    };
    std::vector<Cell> cells;
    for (const auto& record : cohort) {
        for (const auto& spec : cfg.models) {
            for (const std::int64_t step : cfg.step_s_options) {
                for (const int hist : cfg.history_hours) {
                    for (const int horizon : cfg.horizon_minutes) {
                        cells.push_back({&record, spec, step, hist, horizon});
                    }
                }
            }
        }
    }

    std::vector<EvalRow> rows(cells.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        Cell cell = cells[i];
        cell.spec.seed = Rng::derive(cfg.seed, {0x9215dULL, i});
        try {
            rows[i] = walk_forward(*cell.record, cell.spec, cell.step_s,
                                   cell.history_h, cell.horizon_min, cfg);
        } catch (const std::exception& e) {
            EvalRow& row = rows[i];
            row.patient_id = cell.record->patient_id;
            row.model = cell.spec.name();
            row.step_s = cell.step_s;
            row.history_h = cell.history_h;
            row.horizon_min = cell.horizon_min;
            row.n_predictions = 0;
            row.rmse = row.mae = 0.0;
            row.error = e.what();
        }
    });
    return rows;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

void write_eval_csv(const std::vector<EvalRow>& rows, std::ostream& out) {
    out << "patient_id,model,step_s,history_h,horizon_min,n,rmse,mae\n";
    for (const auto& r : rows) {
        out << r.patient_id << ',' << r.model << ',' << r.step_s << ','
            << r.history_h << ',' << r.horizon_min << ',' << r.n_predictions
            << ',';
        if (r.ok()) {
            out << fmt6(r.rmse) << ',' << fmt6(r.mae) << '\n';
        } else {
            out << ",\n";
        }
    }
}

void write_eval_jsonl(const std::vector<EvalRow>& rows, std::ostream& out) {
    using nlohmann::json;
    for (const auto& r : rows) {
        json rec;
        rec["patient_id"] = r.patient_id;
        rec["model"] = r.model;
        rec["step_s"] = r.step_s;
        rec["history_h"] = r.history_h;
        rec["horizon_min"] = r.horizon_min;
        rec["n"] = r.n_predictions;
        if (r.ok()) {
            rec["rmse"] = r.rmse;
            rec["mae"] = r.mae;
        } else {
            rec["error"] = r.error;
        }
        out << rec.dump() << '\n';
    }
}

std::vector<EvalRow> read_eval_csv(std::istream& in, const std::string& name) {
    std::vector<EvalRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "patient_id,model,step_s,history_h,horizon_min,n,rmse,mae") {
        throw ParseError(name, 1, "bad eval CSV header");
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                f.push_back(line.substr(pos));
                break;
            }
            f.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (f.size() != 8) throw ParseError(name, lineno, "expected 8 fields");
        EvalRow r;
        r.patient_id = f[0];
        r.model = f[1];
        try {
            r.step_s = std::stoll(f[2]);
            r.history_h = std::stoi(f[3]);
            r.horizon_min = std::stoi(f[4]);
            r.n_predictions = static_cast<std::size_t>(std::stoull(f[5]));
            if (f[6].empty() || f[7].empty()) {
                r.error = "error row";
            } else {
                r.rmse = std::stod(f[6]);
                r.mae = std::stod(f[7]);
            }
        } catch (const std::exception&) {
            throw ParseError(name, lineno, "bad numeric field");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace glycast
