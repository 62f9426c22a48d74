// glycast: synthetic CGM cohorts, on-board featurization, sequential input
// selection, short-horizon forecasting, and constrained-device benchmarks.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glycast/bench.hpp"
#include "glycast/config.hpp"
#include "glycast/csv_io.hpp"
#include "glycast/errors.hpp"
#include "glycast/eval.hpp"
#include "glycast/features.hpp"
#include "glycast/models.hpp"
#include "glycast/parallel.hpp"
#include "glycast/rng.hpp"
#include "glycast/simulator.hpp"
#include "glycast/sisal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glycast;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 0;  // 0 -> hardware
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out = true) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    if (with_out) cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "master seed (omitted: random, recorded)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--workers", opts.workers, "parallel worker cap");
}

KeyValueConfig load_config(const CommonOpts& opts) {
    KeyValueConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = KeyValueConfig::parse_file(opts.config_path);
    }
    cfg.apply_env_overrides();
    return cfg;
}

std::uint64_t resolve_seed(CommonOpts& opts, KeyValueConfig& cfg) {
    if (opts.seed_given) return opts.seed;
    if (cfg.has("seed")) {
        return static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    }
    (void)cfg.get_int("seed", 0);
    std::random_device rd;
    opts.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return opts.seed;
}

unsigned resolve_workers(const CommonOpts& opts) {
    return opts.workers > 0 ? opts.workers : default_workers();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory: " + dir);
    }
}

void reject_unknown_keys(const KeyValueConfig& cfg) {
    const auto unused = cfg.unused_keys();
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unused) msg += " " + k;
        throw std::runtime_error(msg);
    }
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    std::uint64_t seed, const KeyValueConfig& cfg,
                    const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
    json doc;
    doc["tool"] = "glycast";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["config"] = json::object();
    for (const auto& [key, value] : cfg.entries()) doc["config"][key] = value;
    doc["outputs"] = outputs;
    for (const auto& [key, value] : extra.items()) doc[key] = value;
    std::ofstream f(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest.json");
    f << doc.dump(2) << '\n';
}

std::vector<PatientRecord> load_records(const std::string& data) {
    std::vector<PatientRecord> records;
    if (fs::is_directory(data)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(data)) {
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) records.push_back(read_patient_csv(f.string()));
    } else if (fs::is_regular_file(data)) {
        records.push_back(read_patient_csv(data));
    } else {
        throw std::runtime_error("no such file or directory: " + data);
    }
    if (records.empty()) {
        throw std::runtime_error("no patient CSV files under: " + data);
    }
    return records;
}

// ---- simulate ----

int cmd_simulate(CommonOpts& opts, int n_patients, int days) {
    auto cfg = load_config(opts);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    Scenario scenario = scenario_from_config(cfg);
    if (days > 0) scenario.days = days;
    reject_unknown_keys(cfg);
    ensure_out_dir(opts.out_dir);

    const auto cohort =
        default_cohort(n_patients, Rng::derive(seed, {0xc0110cULL}));
    std::vector<std::string> files(cohort.size());
    std::vector<PatientRecord> records(cohort.size());
    parallel_for(cohort.size(), resolve_workers(opts), [&](std::size_t i) {
        char id[16];
        std::snprintf(id, sizeof(id), "p%02zu", i + 1);
        records[i] = simulate_patient(cohort[i], scenario,
                                      Rng::derive(seed, {0x51eedULL, i}), id);
    });
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string name = records[i].patient_id + ".csv";
        write_patient_csv(records[i], (fs::path(opts.out_dir) / name).string());
        files[i] = name;
    }

    json extra;
    extra["patients"] = n_patients;
    extra["days"] = scenario.days;
    write_manifest(opts.out_dir, "simulate", seed, cfg, files, extra);
    std::cout << "simulated " << n_patients << " patients x " << scenario.days
              << " days -> " << opts.out_dir << "\n";
    return 0;
}

// ---- select ----

int cmd_select(CommonOpts& opts, const std::string& data,
               const std::string& modes_flag, bool per_patient) {
    auto cfg = load_config(opts);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    SelectionConfig sel = selection_from_config(cfg);
    const KernelSet kernels = kernels_from_config(cfg);
    const auto step_s = cfg.get_int("select.step_s", 300);
    const int horizon_min = static_cast<int>(cfg.get_int("select.horizon_min", 15));
    const auto max_gap_s = cfg.get_int("select.max_gap_minutes", 30) * 60;
    reject_unknown_keys(cfg);

    const auto records = load_records(data);
    ensure_out_dir(opts.out_dir);
    const unsigned workers = resolve_workers(opts);
    const int horizon_steps =
        static_cast<int>((horizon_min * 60 + step_s - 1) / step_s);

    std::vector<FeatureMode> modes;
    if (modes_flag == "both") {
        modes = {FeatureMode::multivariate, FeatureMode::multivariate_onboard};
    } else {
        modes = {parse_feature_mode(modes_flag)};
    }

    std::vector<std::string> outputs;
    for (const FeatureMode mode : modes) {
        const std::string tag =
            mode == FeatureMode::multivariate ? "raw" : "onboard";

        std::vector<SupervisedSet> sets(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            sets[i] = build_supervised(records[i], step_s, mode, kernels,
                                       sel.max_lag_steps, horizon_steps,
                                       max_gap_s);
        }

        SelectionConfig pooled_cfg = sel;
        pooled_cfg.seed = Rng::derive(seed, {0x9001edULL});
        const auto pooled = sisal(concat_sets(sets), pooled_cfg, workers);

        {
            std::ofstream csv(fs::path(opts.out_dir) / ("ranking_" + tag + ".csv"),
                              std::ios::binary);
            write_selection_csv(pooled, csv);
            std::ofstream jsonl(fs::path(opts.out_dir) / ("steps_" + tag + ".jsonl"),
                                std::ios::binary);
            write_selection_jsonl(pooled, jsonl);
        }
        outputs.push_back("ranking_" + tag + ".csv");
        outputs.push_back("steps_" + tag + ".jsonl");

        std::cout << "== pooled ranking (" << tag << " features) ==\n";
        write_selection_csv(pooled, std::cout);

        // Per-patient runs stick to the on-board mode when sweeping both;
        // mode-by-mode per-patient selection is available via --features.
        if (per_patient &&
            (modes.size() == 1 || mode == FeatureMode::multivariate_onboard)) {
            const fs::path pp_dir = fs::path(opts.out_dir) / "per_patient";
            fs::create_directories(pp_dir);
            std::vector<SelectionResult> results(records.size());
            parallel_for(records.size(), workers, [&](std::size_t i) {
                SelectionConfig pc = sel;
                pc.seed = Rng::derive(seed, {0x9e4ULL, i});
                results[i] = sisal(sets[i], pc, 1);
            });
            for (std::size_t i = 0; i < records.size(); ++i) {
                const std::string base = records[i].patient_id + "_" + tag;
                std::ofstream csv(pp_dir / (base + ".csv"), std::ios::binary);
                write_selection_csv(results[i], csv);
                std::ofstream jsonl(pp_dir / (base + ".jsonl"), std::ios::binary);
                write_selection_jsonl(results[i], jsonl);
                outputs.push_back("per_patient/" + base + ".csv");
            }
        }
    }

    write_manifest(opts.out_dir, "select", seed, cfg, outputs);
    return 0;
}

// ---- train ----

int cmd_train(CommonOpts& opts, const std::string& data,
              const std::string& model_name, const std::string& out_file,
              std::int64_t step_s, int history_h, int horizon_min,
              const std::string& features, const std::string& patient) {
    auto cfg = load_config(opts);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    const KernelSet kernels = kernels_from_config(cfg);
    ForecasterSpec spec =
        forecaster_overrides_from_config(cfg, ForecasterSpec::parse(model_name));
    spec.seed = seed;
    const auto max_gap_s = cfg.get_int("eval.max_gap_minutes", 30) * 60;
    reject_unknown_keys(cfg);

    auto records = load_records(data);
    const PatientRecord* record = &records[0];
    if (!patient.empty()) {
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const PatientRecord& r) {
                                         return r.patient_id == patient;
                                     });
        if (it == records.end()) {
            throw std::runtime_error("no record for patient '" + patient + "'");
        }
        record = &*it;
    }

    const int horizon_steps =
        static_cast<int>((horizon_min * 60 + step_s - 1) / step_s);
    const int lags = static_cast<int>(history_h * 3600 / step_s);

    std::unique_ptr<TrainedModel> model;
    double train_rmse = 0.0;
    if (spec.kind == ModelKind::arima) {
        auto channels = make_feature_series(
            *record, step_s, FeatureMode::univariate_glucose, kernels);
        const auto segments = fill_gaps(channels.at(VariableId::glucose),
                                        static_cast<int>(max_gap_s / step_s));
        if (segments.empty()) throw std::runtime_error("no glucose data");
        const auto longest = std::max_element(
            segments.begin(), segments.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });
        model = spec.auto_order ? fit_arima_auto(longest->values, step_s)
                                : fit_arima(*longest, spec.p, spec.d, spec.q);
        train_rmse = std::sqrt(static_cast<const ArimaModel&>(*model).sigma2());
    } else {
        std::map<VariableId, int> lag_map;
        const auto channels = make_feature_series(
            *record, step_s, parse_feature_mode(features), kernels);
        for (const auto& [var, s] : channels) lag_map[var] = lags;
        const auto set =
            build_supervised(*record, step_s, parse_feature_mode(features),
                             kernels, lag_map, horizon_steps, max_gap_s);
        model = fit(spec, set, resolve_workers(opts));
        std::vector<double> pred(set.n_rows());
        for (std::size_t i = 0; i < set.n_rows(); ++i) {
            pred[i] = model->predict_row({set.X.row(i), set.n_features()});
        }
        train_rmse = rmse(pred, set.y);
    }

    save_model(*model, out_file);
    std::cout << "trained " << spec.name() << " on " << record->patient_id
              << " (in-sample rmse " << train_rmse << " mg/dL) -> " << out_file
              << "\n";
    return 0;
}

// ---- evaluate ----

int cmd_evaluate(CommonOpts& opts, const std::string& data,
                 const std::vector<std::string>& model_flags) {
    auto cfg = load_config(opts);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    EvalConfig ev = eval_from_config(cfg);
    if (!model_flags.empty()) {
        ev.models.clear();
        for (const auto& name : model_flags) {
            ev.models.push_back(
                forecaster_overrides_from_config(cfg, ForecasterSpec::parse(name)));
        }
    }
    // The persistence baseline rides along in every grid run so the report
    // can flag cells that lose to it.
    const bool has_persistence =
        std::any_of(ev.models.begin(), ev.models.end(), [](const ForecasterSpec& m) {
            return m.kind == ModelKind::persistence;
        });
    if (!has_persistence) {
        ev.models.insert(ev.models.begin(), ForecasterSpec::parse("persistence"));
    }
    reject_unknown_keys(cfg);
    ev.seed = seed;
    ev.workers = resolve_workers(opts);

    const auto records = load_records(data);
    ensure_out_dir(opts.out_dir);
    const auto rows = run_grid(records, ev);

    {
        std::ofstream csv(fs::path(opts.out_dir) / "eval.csv", std::ios::binary);
        write_eval_csv(rows, csv);
        std::ofstream jsonl(fs::path(opts.out_dir) / "eval.jsonl", std::ios::binary);
        write_eval_jsonl(rows, jsonl);
    }
    std::size_t errors = 0;
    for (const auto& r : rows) errors += !r.ok();
    json extra;
    extra["rows"] = rows.size();
    extra["error_rows"] = errors;
    write_manifest(opts.out_dir, "evaluate", seed, cfg,
                   {"eval.csv", "eval.jsonl"}, extra);
    std::cout << "evaluated " << rows.size() << " grid cells (" << errors
              << " errors) -> " << opts.out_dir << "\n";
    return errors == 0 ? 0 : 1;
}

// ---- bench ----

int cmd_bench(CommonOpts& opts, const std::string& data,
              const std::vector<std::string>& model_flags,
              std::vector<std::size_t> train_sizes) {
    auto cfg = load_config(opts);
    const std::uint64_t seed = resolve_seed(opts, cfg);
    BenchConfig bc = bench_from_config(cfg);
    const KernelSet kernels = kernels_from_config(cfg);
    std::vector<ForecasterSpec> specs;
    const auto names =
        !model_flags.empty()
            ? model_flags
            : cfg.get_list("bench.models", {"persistence", "ridge", "rf", "svr"});
    for (const auto& name : names) {
        specs.push_back(
            forecaster_overrides_from_config(cfg, ForecasterSpec::parse(name)));
    }
    if (train_sizes.empty()) {
        for (const auto& s : cfg.get_list("bench.train_sizes", {"500", "5000"})) {
            train_sizes.push_back(static_cast<std::size_t>(std::stoull(s)));
        }
    }
    const auto step_s = cfg.get_int("bench.step_s", 300);
    const int history_h = static_cast<int>(cfg.get_int("bench.history_hours", 6));
    const int horizon_min =
        static_cast<int>(cfg.get_int("bench.horizon_minutes", 15));
    reject_unknown_keys(cfg);

    const auto records = load_records(data);
    ensure_out_dir(opts.out_dir);

    // Pool rows across the cohort so large train sizes are reachable.
    const int lags = static_cast<int>(history_h * 3600 / step_s);
    const int horizon_steps =
        static_cast<int>((horizon_min * 60 + step_s - 1) / step_s);
    std::vector<SupervisedSet> sets;
    for (const auto& r : records) {
        std::map<VariableId, int> lag_map{{VariableId::glucose, lags}};
        sets.push_back(build_supervised(r, step_s,
                                        FeatureMode::univariate_glucose, kernels,
                                        lag_map, horizon_steps, 1800));
    }
    const auto pooled = concat_sets(sets);

    std::vector<BenchRow> rows;
    for (const ForecasterSpec& base_spec : specs) {
        for (const std::size_t n : train_sizes) {
            if (n > pooled.n_rows()) {
                throw std::runtime_error(
                    "train size " + std::to_string(n) + " exceeds pooled rows (" +
                    std::to_string(pooled.n_rows()) + ")");
            }
            SupervisedSet subset;
            subset.step_s = pooled.step_s;
            subset.horizon_steps = pooled.horizon_steps;
            subset.columns = pooled.columns;
            subset.X = Matrix(n, pooled.n_features());
            std::copy_n(pooled.X.data.begin(), n * pooled.n_features(),
                        subset.X.data.begin());
            subset.y.assign(pooled.y.begin(), pooled.y.begin() + n);
            subset.row_times.assign(pooled.row_times.begin(),
                                    pooled.row_times.begin() + n);
            ForecasterSpec spec = base_spec;
            spec.seed = Rng::derive(seed, {0xbe2c4ULL, n});
            rows.push_back(bench(spec, subset, bc));
        }
    }

    {
        std::ofstream csv(fs::path(opts.out_dir) / "bench.csv", std::ios::binary);
        write_bench_csv(rows, csv);
        std::ofstream jsonl(fs::path(opts.out_dir) / "bench.jsonl", std::ios::binary);
        write_bench_jsonl(rows, jsonl);
    }
    write_manifest(opts.out_dir, "bench", seed, cfg, {"bench.csv", "bench.jsonl"});
    write_bench_csv(rows, std::cout);
    return 0;
}

// ---- report ----

int cmd_report(CommonOpts& opts, const std::string& results) {
    auto cfg = load_config(opts);
    reject_unknown_keys(cfg);
    fs::path in_path = results;
    if (fs::is_directory(in_path)) in_path /= "eval.csv";
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + in_path.string());
    const auto rows = read_eval_csv(in, in_path.string());
    const auto rep = report(rows);

    ensure_out_dir(opts.out_dir);
    {
        std::ofstream f(fs::path(opts.out_dir) / "summary.csv", std::ios::binary);
        f << rep.summary_csv();
        std::ofstream t(fs::path(opts.out_dir) / "summary.txt", std::ios::binary);
        t << rep.text_table();
        std::ofstream l(fs::path(opts.out_dir) / "long.csv", std::ios::binary);
        l << rep.long_csv();
    }
    write_manifest(opts.out_dir, "report", 0, cfg,
                   {"summary.csv", "summary.txt", "long.csv"});
    std::cout << rep.text_table();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"glucose forecasting research toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts sim_opts, sel_opts, train_opts, eval_opts, bench_opts, report_opts;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic cohort");
    int n_patients = 25, days = 0;
    sim->add_option("--patients,-n", n_patients, "cohort size")
        ->check(CLI::PositiveNumber);
    sim->add_option("--days", days, "days per patient (default from config: 14)");
    add_common(sim, sim_opts);

    auto* sel = app.add_subcommand("select", "rank input variables by influence");
    std::string sel_data, sel_modes = "both";
    bool per_patient = true;
    sel->add_option("--data", sel_data, "patient CSV file or directory")->required();
    sel->add_option("--features", sel_modes,
                    "multivariate | multivariate_onboard | both");
    sel->add_flag_callback(
        "--pooled-only", [&per_patient]() { per_patient = false; },
        "skip the per-patient runs");
    add_common(sel, sel_opts);

    auto* train = app.add_subcommand("train", "fit one forecaster and save it");
    std::string train_data, train_model = "rf", train_out = "model.json";
    std::string train_features = "univariate_glucose", train_patient;
    std::int64_t train_step = 300;
    int train_history = 6, train_horizon = 15;
    train->add_option("--data", train_data, "patient CSV file or directory")
        ->required();
    train->add_option("--model", train_model,
                      "persistence|ridge|rf|svr|arima[(p,d,q)]");
    train->add_option("--step", train_step, "grid step seconds");
    train->add_option("--history", train_history, "history window hours");
    train->add_option("--horizon", train_horizon, "prediction horizon minutes");
    train->add_option("--features", train_features, "feature mode");
    train->add_option("--patient", train_patient, "patient id (default: first)");
    train->add_option("--model-out", train_out, "model JSON path");
    add_common(train, train_opts, /*with_out=*/false);

    auto* ev = app.add_subcommand("evaluate", "walk-forward accuracy grid");
    std::string eval_data;
    std::vector<std::string> eval_models;
    ev->add_option("--data", eval_data, "patient CSV directory")->required();
    ev->add_option("--models", eval_models, "restrict the model list")
        ->delimiter(',');
    add_common(ev, eval_opts);

    auto* bn = app.add_subcommand("bench", "constrained-resource stress benchmark");
    std::string bench_data;
    std::vector<std::string> bench_models;
    std::vector<std::size_t> bench_sizes;
    bn->add_option("--data", bench_data, "patient CSV directory")->required();
    bn->add_option("--models", bench_models, "models to time")->delimiter(',');
    bn->add_option("--train-sizes", bench_sizes, "training-set sizes")
        ->delimiter(',');
    add_common(bn, bench_opts);

    auto* rep = app.add_subcommand("report", "aggregate evaluation rows");
    std::string report_results;
    rep->add_option("--results", report_results, "eval.csv or its directory")
        ->required();
    add_common(rep, report_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts, n_patients, days);
        if (sel->parsed()) {
            return cmd_select(sel_opts, sel_data, sel_modes, per_patient);
        }
        if (train->parsed()) {
            return cmd_train(train_opts, train_data, train_model, train_out,
                             train_step, train_history, train_horizon,
                             train_features, train_patient);
        }
        if (ev->parsed()) return cmd_evaluate(eval_opts, eval_data, eval_models);
        if (bn->parsed()) {
            return cmd_bench(bench_opts, bench_data, bench_models, bench_sizes);
        }
        if (rep->parsed()) return cmd_report(report_opts, report_results);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
