#include "glycast/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace glycast {

void BenchConfig::validate() const {
    if (repetitions < 3) throw std::invalid_argument("bench: repetitions >= 3");
    if (warmup < 0) throw std::invalid_argument("bench: warmup >= 0");
    if (thread_cap < 1) throw std::invalid_argument("bench: thread_cap >= 1");
}

std::uint64_t peak_rss_bytes() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (status && std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            unsigned long long kb = 0;
            if (std::sscanf(line.c_str(), "VmHWM: %llu", &kb) == 1) {
                return kb * 1024;
            }
        }
    }
    // Some kernels omit VmHWM; getrusage covers those.
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) == 0 && ru.ru_maxrss > 0) {
        return static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
    }
    return 0;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double p95_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

} // namespace

BenchRow bench(const ForecasterSpec& spec, const SupervisedSet& train,
               const BenchConfig& config) {
    config.validate();
    spec.validate();

    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    BenchRow row;
    row.model = spec.name();
    row.train_rows = train.n_rows();
    row.n_features = train.n_features();

    for (int w = 0; w < config.warmup; ++w) {
        auto m = fit(spec, train, config.thread_cap);
        (void)m->predict_row({train.X.row(0), train.n_features()});
    }

    std::vector<double> fit_ms, pred_ms;
    fit_ms.reserve(config.repetitions);
    pred_ms.reserve(config.repetitions);
    for (int r = 0; r < config.repetitions; ++r) {
        const auto t0 = clock::now();
        const auto model = fit(spec, train, config.thread_cap);
        fit_ms.push_back(ms_since(t0));

        const std::size_t probe =
            static_cast<std::size_t>(r) % train.n_rows();
        const auto t1 = clock::now();
        volatile double sink =
            model->predict_row({train.X.row(probe), train.n_features()});
        pred_ms.push_back(ms_since(t1));
        (void)sink;
    }

    row.fit_ms_median = median_of(fit_ms);
    row.fit_ms_p95 = p95_of(fit_ms);
    row.predict_one_ms_median = median_of(pred_ms);
    row.predict_one_ms_p95 = p95_of(pred_ms);
    row.peak_rss_bytes = peak_rss_bytes();
    row.rss_supported = row.peak_rss_bytes > 0;
    return row;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "model,train_rows,n_features,fit_ms_median,fit_ms_p95,"
           "predict_one_ms_median,predict_one_ms_p95,peak_rss_bytes\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%.6f,%.6f",
                      r.fit_ms_median, r.fit_ms_p95, r.predict_one_ms_median,
                      r.predict_one_ms_p95);
        out << r.model << ',' << r.train_rows << ',' << r.n_features << ','
            << buf << ',' << r.peak_rss_bytes << '\n';
    }
}

void write_bench_jsonl(const std::vector<BenchRow>& rows, std::ostream& out) {
    using nlohmann::json;
    for (const auto& r : rows) {
        json rec;
        rec["model"] = r.model;
        rec["train_rows"] = r.train_rows;
        rec["n_features"] = r.n_features;
        rec["fit_ms_median"] = r.fit_ms_median;
        rec["fit_ms_p95"] = r.fit_ms_p95;
        rec["predict_one_ms_median"] = r.predict_one_ms_median;
        rec["predict_one_ms_p95"] = r.predict_one_ms_p95;
        rec["peak_rss_bytes"] = r.peak_rss_bytes;
        rec["rss_supported"] = r.rss_supported;
        out << rec.dump() << '\n';
    }
}

} // namespace glycast
