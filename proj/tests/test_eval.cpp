#include <doctest.h>

#include <cmath>
#include <sstream>

#include "glycast/errors.hpp"
#include "glycast/eval.hpp"
#include "glycast/rng.hpp"
#include "glycast/simulator.hpp"

using namespace glycast;

namespace {

PatientRecord sim_record(std::uint64_t seed, int days = 14,
                         double noise = 5.0, double gap_rate = 0.5) {
    PatientParams p;
    p.cgm_noise_sd = noise;
    Scenario sc;
    sc.days = days;
    sc.gap_rate_per_day = gap_rate;
    return simulate_patient(p, sc, seed, "p" + std::to_string(seed));
}

PatientRecord constant_record(int days = 14) {
    PatientParams p;
    p.cgm_noise_sd = 0.0;
    p.cgm_delay_min = 0.0;
    p.dawn_amp = 0.0;
    Scenario sc;
    sc.days = days;
    sc.meals.clear();
    sc.exercise_sessions.clear();
    sc.gap_rate_per_day = 0.0;
    return simulate_patient(p, sc, 1, "flat");
}

EvalConfig small_config() {
    EvalConfig cfg;
    cfg.models = {ForecasterSpec::parse("persistence")};
    cfg.step_s_options = {900};
    cfg.history_hours = {6};
    cfg.horizon_minutes = {15};
    return cfg;
}

} // namespace

TEST_CASE("rmse/mae: hand arithmetic and the empty/mismatch errors") {
    const std::vector<double> a = {1.0, 2.0};
    const std::vector<double> b = {3.0, 2.0};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK(mae(a, b) == doctest::Approx(1.0));
    const std::vector<double> c = {1.0};
    CHECK_THROWS_AS(rmse(a, c), std::invalid_argument);
    const std::vector<double> empty;
    CHECK_THROWS_AS(mae(empty, empty), std::invalid_argument);
}

TEST_CASE("rmse/mae: random vectors match an independent two-pass oracle") {
    Rng rng(99);
    std::vector<double> pred(257), actual(257);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = rng.uniform(50.0, 250.0);
        actual[i] = rng.uniform(50.0, 250.0);
    }
    // Two-pass oracle: collect the residuals first, then reduce.
    std::vector<double> resid(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) resid[i] = pred[i] - actual[i];
    double sq = 0.0, ab = 0.0;
    for (double r : resid) {
        sq += r * r;
        ab += std::abs(r);
    }
    CHECK(std::abs(rmse(pred, actual) - std::sqrt(sq / resid.size())) < 1e-12);
    CHECK(std::abs(mae(pred, actual) - ab / resid.size()) < 1e-12);
}

TEST_CASE("walk_forward: 6 h history means 24 lags at 900 s, 72 at 300 s") {
    const auto record = sim_record(11, 14, 5.0, /*gap_rate=*/0.0);
    const auto cfg = small_config();

    // Gap-free 14-day record: the test-row count pins the lag construction.
    // rows = len - horizon_steps - train_steps - max_lag.
    const auto row900 = walk_forward(record, ForecasterSpec::parse("persistence"),
                                     900, 6, 15, cfg);
    CHECK(row900.n_predictions == 1344u - 1u - 960u - 24u);
    const auto row300 = walk_forward(record, ForecasterSpec::parse("persistence"),
                                     300, 6, 15, cfg);
    CHECK(row300.n_predictions == 4032u - 3u - 2880u - 72u);
}

TEST_CASE("walk_forward: persistence on a constant record is exact") {
    const auto record = constant_record();
    const auto row = walk_forward(record, ForecasterSpec::parse("persistence"),
                                  300, 3, 15, small_config());
    CHECK(row.rmse == 0.0);
    CHECK(row.mae == 0.0);
    CHECK(row.n_predictions > 0);
}

TEST_CASE("walk_forward: arima runs recursively over the same test rows") {
    const auto record = sim_record(12, 14, 2.0);
    const auto base = walk_forward(record, ForecasterSpec::parse("persistence"),
                                   900, 3, 30, small_config());
    const auto arima_row = walk_forward(record, ForecasterSpec::parse("arima(1,0,0)"),
                                        900, 3, 30, small_config());
    CHECK(arima_row.n_predictions == base.n_predictions);
    CHECK(std::isfinite(arima_row.rmse));
    CHECK(arima_row.rmse > 0.0);
}

TEST_CASE("walk_forward: too-short records are rejected") {
    const auto record = sim_record(13, 5);
    CHECK_THROWS_AS(walk_forward(record, ForecasterSpec::parse("persistence"),
                                 900, 3, 15, small_config()),
                    std::invalid_argument);
}

TEST_CASE("run_grid: single cell gives one row") {
    const std::vector<PatientRecord> cohort = {sim_record(21)};
    const auto rows = run_grid(cohort, small_config());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ok());
    CHECK(rows[0].patient_id == "p21");
    CHECK(rows[0].model == "persistence");
}

TEST_CASE("run_grid: full cardinality 3 models x 3 x 3 x 4 x N") {
    EvalConfig cfg;
    cfg.models = {ForecasterSpec::parse("persistence"),
                  ForecasterSpec::parse("ridge"),
                  ForecasterSpec::parse("arima(1,0,0)")};
    // Light axes but the full unique-combination count.
    const std::vector<PatientRecord> cohort = {sim_record(31), sim_record(32)};
    cfg.workers = 2;
    const auto rows = run_grid(cohort, cfg);
    CHECK(rows.size() == 3u * 3u * 3u * 4u * 2u);
    std::size_t ok = 0;
    for (const auto& r : rows) ok += r.ok();
    CHECK(ok == rows.size());
}

TEST_CASE("run_grid: cell failures become error rows, never aborts") {
    EvalConfig cfg = small_config();
    const std::vector<PatientRecord> cohort = {sim_record(41), sim_record(42, 5)};
    const auto rows = run_grid(cohort, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok());
    CHECK(!rows[1].ok());
    CHECK(rows[1].n_predictions == 0);
    CHECK(!rows[1].error.empty());
}

TEST_CASE("run_grid: deterministic bytes across runs and worker counts") {
    EvalConfig cfg = small_config();
    cfg.models = {ForecasterSpec::parse("persistence"), ForecasterSpec::parse("rf")};
    cfg.step_s_options = {900};
    cfg.history_hours = {3};
    cfg.horizon_minutes = {15, 30};
    cfg.seed = 7;
    const std::vector<PatientRecord> cohort = {sim_record(51), sim_record(52)};

    auto csv_of = [&](unsigned workers) {
        EvalConfig c = cfg;
        c.workers = workers;
        const auto rows = run_grid(cohort, c);
        std::ostringstream out;
        write_eval_csv(rows, out);
        return out.str();
    };
    const std::string a = csv_of(1);
    CHECK(a == csv_of(1));
    CHECK(a == csv_of(4));
}

TEST_CASE("eval csv: write/read round trip including error rows") {
    std::vector<EvalRow> rows(2);
    rows[0] = {"p1", "rf", 300, 6, 15, 100, 7.25, 5.5, ""};
    rows[1] = {"p2", "svr", 900, 3, 30, 0, 0.0, 0.0, "boom"};
    std::ostringstream out;
    write_eval_csv(rows, out);
    std::istringstream in(out.str());
    const auto back = read_eval_csv(in, "mem");
    REQUIRE(back.size() == 2);
    CHECK(back[0].ok());
    CHECK(back[0].rmse == doctest::Approx(7.25));
    CHECK(!back[1].ok());

    std::ostringstream jsonl;
    write_eval_jsonl(rows, jsonl);
    CHECK(jsonl.str().find("\"error\":\"boom\"") != std::string::npos);
}

TEST_CASE("report: aggregation, best cell, persistence flag") {
    std::vector<EvalRow> rows;
    rows.push_back({"p1", "persistence", 300, 6, 15, 10, 8.0, 6.0, ""});
    rows.push_back({"p2", "persistence", 300, 6, 15, 10, 10.0, 7.0, ""});
    rows.push_back({"p1", "rf", 300, 6, 15, 10, 6.0, 4.0, ""});
    rows.push_back({"p2", "rf", 300, 6, 15, 10, 7.0, 5.0, ""});
    rows.push_back({"p1", "svr", 300, 6, 15, 10, 12.0, 9.0, ""});
    rows.push_back({"p2", "svr", 300, 6, 15, 10, 14.0, 10.0, ""});

    const auto rep = report(rows);
    REQUIRE(rep.cells.size() == 3);
    // Cells are keyed (model, step, history, horizon): map order.
    const auto& rf_cell = rep.cells[1];
    CHECK(rf_cell.model == "rf");
    CHECK(rf_cell.n_patients == 2);
    CHECK(rf_cell.mean_rmse == doctest::Approx(6.5));
    CHECK(rf_cell.beats_persistence);
    CHECK(rep.cells[rep.best_cell].model == "rf");
    const auto& svr_cell = rep.cells[2];
    CHECK(svr_cell.model == "svr");
    CHECK(!svr_cell.beats_persistence);

    const auto csv = rep.summary_csv();
    CHECK(csv.find("model,step_s,history_h,horizon_min") == 0);
    CHECK(rep.text_table().find("best") != std::string::npos);
    // Stable ordering: regenerating gives identical bytes.
    CHECK(report(rows).summary_csv() == csv);
    CHECK(rep.long_csv().find("mean_rmse") != std::string::npos);

    CHECK_THROWS_AS(report({}), std::invalid_argument);
}

TEST_CASE("eval config: defaults validate; non-divisible horizons ceil to a step") {
    EvalConfig ok = EvalConfig::defaults();
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.models.size() == 3);

    // 15 min at a 600 s cadence realizes as the 2-step (20 min) forecast.
    const auto record = sim_record(61, 14, 5.0, /*gap_rate=*/0.0);
    const auto row = walk_forward(record, ForecasterSpec::parse("persistence"),
                                  600, 6, 15, small_config());
    CHECK(row.n_predictions == 2016u - 2u - 1440u - 36u);

    EvalConfig bad = small_config();
    bad.history_hours = {1};  // one hour is not a whole number of 420 s steps
    bad.step_s_options = {420};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("walk_forward: multivariate and onboard feature modes run clean") {
    const auto record = sim_record(71, 14);
    for (const FeatureMode mode : {FeatureMode::multivariate,
                                   FeatureMode::multivariate_onboard}) {
        EvalConfig cfg = small_config();
        cfg.feature_mode = mode;
        const auto row = walk_forward(record, ForecasterSpec::parse("ridge"),
                                      900, 3, 15, cfg);
        CHECK(row.ok());
        CHECK(row.n_predictions > 0);
        CHECK(std::isfinite(row.rmse));
    }
}
