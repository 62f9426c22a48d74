#include "glycast/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "glycast/errors.hpp"

extern char** environ;

namespace glycast {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& name) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ParseError(name, lineno, "expected key=value");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) throw ParseError(name, lineno, "empty key");
        if (cfg.values_.count(key)) {
            throw ParseError(name, lineno, "duplicate key '" + key + "'");
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    return parse(f, path);
}

void KeyValueConfig::apply_env_overrides() {
    constexpr const char* kPrefix = "GLYCAST_";
    for (char** env = environ; env && *env; ++env) {
        const std::string entry(*env);
        if (entry.rfind(kPrefix, 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(std::string(kPrefix).size(),
                                       eq - std::string(kPrefix).size());
        if (key == "BIN") continue;  // reserved for tooling, not a config key
        // FOO__BAR -> foo.bar
        std::string mapped;
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (key[i] == '_' && i + 1 < key.size() && key[i + 1] == '_') {
                mapped += '.';
                ++i;
            } else {
                mapped += static_cast<char>(
                    std::tolower(static_cast<unsigned char>(key[i])));
            }
        }
        values_[mapped] = entry.substr(eq + 1);
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("junk");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad number for '" + key + "': " +
                                 it->second);
    }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("junk");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for '" + key + "': " +
                                 it->second);
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config: bad bool for '" + key + "': " + it->second);
}

std::vector<std::string> KeyValueConfig::get_list(
    const std::string& key, const std::vector<std::string>& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) out.push_back(key);
    }
    return out;
}

Scenario scenario_from_config(KeyValueConfig& cfg) {
    Scenario sc;
    sc.days = static_cast<int>(cfg.get_int("scenario.days", sc.days));
    sc.basal_rate_u_per_h =
        cfg.get_double("scenario.basal_rate_u_per_h", sc.basal_rate_u_per_h);
    sc.sleep_start_h = cfg.get_double("scenario.sleep_start_h", sc.sleep_start_h);
    sc.sleep_end_h = cfg.get_double("scenario.sleep_end_h", sc.sleep_end_h);
    sc.gap_rate_per_day =
        cfg.get_double("scenario.gap_rate_per_day", sc.gap_rate_per_day);
    sc.gap_min_minutes =
        cfg.get_double("scenario.gap_min_minutes", sc.gap_min_minutes);
    sc.gap_max_minutes =
        cfg.get_double("scenario.gap_max_minutes", sc.gap_max_minutes);

    sc.bolus.carb_ratio_g_per_u =
        cfg.get_double("scenario.bolus.carb_ratio_g_per_u", sc.bolus.carb_ratio_g_per_u);
    sc.bolus.correction_mg_dl_per_u = cfg.get_double(
        "scenario.bolus.correction_mg_dl_per_u", sc.bolus.correction_mg_dl_per_u);
    sc.bolus.target_mg_dl =
        cfg.get_double("scenario.bolus.target_mg_dl", sc.bolus.target_mg_dl);

    sc.jitter.meal_time_sd_min =
        cfg.get_double("scenario.jitter.meal_time_sd_min", sc.jitter.meal_time_sd_min);
    sc.jitter.carb_frac_sd =
        cfg.get_double("scenario.jitter.carb_frac_sd", sc.jitter.carb_frac_sd);
    sc.jitter.exercise_time_sd_min = cfg.get_double(
        "scenario.jitter.exercise_time_sd_min", sc.jitter.exercise_time_sd_min);
    sc.jitter.intensity_sd =
        cfg.get_double("scenario.jitter.intensity_sd", sc.jitter.intensity_sd);
    sc.jitter.sleep_sd_h =
        cfg.get_double("scenario.jitter.sleep_sd_h", sc.jitter.sleep_sd_h);

    // meal.N.hour / meal.N.carbs_g, N from 1; presence of .hour defines N.
    std::vector<MealSpec> meals;
    for (int i = 1;; ++i) {
        const std::string base = "scenario.meal." + std::to_string(i);
        if (!cfg.has(base + ".hour")) break;
        MealSpec m;
        m.hour = cfg.get_double(base + ".hour", 12.0);
        m.carbs_g = cfg.get_double(base + ".carbs_g", 50.0);
        meals.push_back(m);
    }
    if (!meals.empty()) sc.meals = std::move(meals);

    std::vector<ExerciseSpec> sessions;
    for (int i = 1;; ++i) {
        const std::string base = "scenario.exercise." + std::to_string(i);
        if (!cfg.has(base + ".hour")) break;
        ExerciseSpec e;
        e.hour = cfg.get_double(base + ".hour", 17.0);
        e.duration_min = cfg.get_double(base + ".duration_min", 40.0);
        e.intensity = cfg.get_double(base + ".intensity", 0.5);
        sessions.push_back(e);
    }
    if (cfg.get_bool("scenario.no_exercise", false)) {
        sc.exercise_sessions.clear();
    } else if (!sessions.empty()) {
        sc.exercise_sessions = std::move(sessions);
    }

    sc.validate();
    return sc;
}

namespace {

Kernel kernel_from_config(KeyValueConfig& cfg, const std::string& base, Kernel k) {
    const std::string shape = cfg.get_string(
        base + ".shape",
        k.shape == Kernel::Shape::bi_exponential ? "bi_exponential" : "linear_decay");
    if (shape == "bi_exponential") {
        k.shape = Kernel::Shape::bi_exponential;
    } else if (shape == "linear_decay") {
        k.shape = Kernel::Shape::linear_decay;
    } else {
        throw std::runtime_error("config: unknown kernel shape '" + shape + "'");
    }
    k.duration_s = cfg.get_double(base + ".duration_min", k.duration_s / 60.0) * 60.0;
    k.peak_s = cfg.get_double(base + ".peak_min", k.peak_s / 60.0) * 60.0;
    k.validate();
    return k;
}

} // namespace

KernelSet kernels_from_config(KeyValueConfig& cfg) {
    KernelSet ks;
    ks.insulin = kernel_from_config(cfg, "kernel.insulin", ks.insulin);
    ks.carbs = kernel_from_config(cfg, "kernel.carbs", ks.carbs);
    ks.exercise = kernel_from_config(cfg, "kernel.exercise", ks.exercise);
    return ks;
}

SelectionConfig selection_from_config(KeyValueConfig& cfg) {
    SelectionConfig sel;
    // Defaults cover the monitored channels plus the on-board features at
    // the 300 s grid.
    sel.max_lag_steps = {
        {VariableId::glucose, 48}, {VariableId::iob, 24},
        {VariableId::cob, 36},     {VariableId::eob, 16},
        {VariableId::insulin_bolus, 24}, {VariableId::carbs, 36},
        {VariableId::exercise, 16},
        {VariableId::heart_rate, 8},     {VariableId::sleep, 4},
        {VariableId::schedule, 4},
    };
    sel.resamples = static_cast<int>(cfg.get_int("select.resamples", sel.resamples));
    sel.train_fraction = cfg.get_double("select.train_fraction", sel.train_fraction);
    sel.q_low = cfg.get_double("select.q_low", sel.q_low);
    sel.q_high = cfg.get_double("select.q_high", sel.q_high);
    sel.ridge_lambda = cfg.get_double("select.ridge_lambda", sel.ridge_lambda);
    sel.sparsity_tolerance =
        cfg.get_double("select.sparsity_tolerance", sel.sparsity_tolerance);
    sel.max_rows = static_cast<std::size_t>(
        cfg.get_int("select.max_rows", 1500));
    for (const VariableId v : kAllVariables) {
        const std::string key = "select.max_lag." + std::string(to_string(v));
        if (cfg.has(key)) {
            sel.max_lag_steps[v] = static_cast<int>(cfg.get_int(key, 0));
        } else {
            (void)cfg.get_int(key, 0);  // mark known
        }
    }
    sel.validate();
    return sel;
}

EvalConfig eval_from_config(KeyValueConfig& cfg) {
    EvalConfig ev = EvalConfig::defaults();
    const auto model_names =
        cfg.get_list("eval.models", {"persistence", "rf", "svr"});
    ev.models.clear();
    for (const auto& name : model_names) {
        ev.models.push_back(ForecasterSpec::parse(name));
    }
    auto to_i64 = [](const std::vector<std::string>& in) {
        std::vector<std::int64_t> out;
        for (const auto& s : in) out.push_back(std::stoll(s));
        return out;
    };
    auto to_int = [](const std::vector<std::string>& in) {
        std::vector<int> out;
        for (const auto& s : in) out.push_back(std::stoi(s));
        return out;
    };
    ev.step_s_options = to_i64(cfg.get_list("eval.steps_s", {"300", "600", "900"}));
    ev.history_hours = to_int(cfg.get_list("eval.history_hours", {"3", "6", "12"}));
    ev.horizon_minutes =
        to_int(cfg.get_list("eval.horizon_minutes", {"15", "30", "45", "60"}));
    ev.split.train_days =
        static_cast<int>(cfg.get_int("eval.train_days", ev.split.train_days));
    ev.split.test_days =
        static_cast<int>(cfg.get_int("eval.test_days", ev.split.test_days));
    ev.feature_mode = parse_feature_mode(
        cfg.get_string("eval.feature_mode", "univariate_glucose"));
    ev.max_gap_interp_s =
        cfg.get_int("eval.max_gap_minutes", ev.max_gap_interp_s / 60) * 60;
    ev.kernels = kernels_from_config(cfg);
    for (auto& m : ev.models) m = forecaster_overrides_from_config(cfg, m);

    ev.validate();
    return ev;
}

ForecasterSpec forecaster_overrides_from_config(KeyValueConfig& cfg,
                                                ForecasterSpec spec) {
    spec.ridge_lambda = cfg.get_double("ridge.lambda", spec.ridge_lambda);
    spec.n_trees = static_cast<int>(cfg.get_int("rf.n_trees", spec.n_trees));
    spec.mtry = static_cast<int>(cfg.get_int("rf.mtry", spec.mtry));
    spec.min_leaf = static_cast<int>(cfg.get_int("rf.min_leaf", spec.min_leaf));
    spec.max_depth = static_cast<int>(cfg.get_int("rf.max_depth", spec.max_depth));
    spec.svr_c = cfg.get_double("svr.c", spec.svr_c);
    spec.svr_epsilon = cfg.get_double("svr.epsilon", spec.svr_epsilon);
    spec.svr_gamma = cfg.get_double("svr.gamma", spec.svr_gamma);
    spec.svr_tol = cfg.get_double("svr.tol", spec.svr_tol);
    spec.svr_max_iter = cfg.get_int("svr.max_iter", spec.svr_max_iter);
    if (spec.kind == ModelKind::arima && !spec.auto_order) {
        spec.p = static_cast<int>(cfg.get_int("arima.p", spec.p));
        spec.d = static_cast<int>(cfg.get_int("arima.d", spec.d));
        spec.q = static_cast<int>(cfg.get_int("arima.q", spec.q));
    }
    spec.validate();
    return spec;
}

BenchConfig bench_from_config(KeyValueConfig& cfg) {
    BenchConfig bc;
    bc.repetitions = static_cast<int>(cfg.get_int("bench.repetitions", bc.repetitions));
    bc.warmup = static_cast<int>(cfg.get_int("bench.warmup", bc.warmup));
    bc.thread_cap = static_cast<unsigned>(cfg.get_int("bench.thread_cap", bc.thread_cap));
    bc.validate();
    return bc;
}

} // namespace glycast
