#ifndef GLYCAST_BENCH_HPP
#define GLYCAST_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "glycast/models.hpp"

namespace glycast {

/// Constrained-resource stress benchmark: wall-clock fit and single-
/// prediction times under a thread cap.
struct BenchConfig {
    int repetitions = 21;
    int warmup = 3;
    unsigned thread_cap = 1;

    void validate() const;
};

struct BenchRow {
    std::string model;
    std::size_t train_rows = 0;
    std::size_t n_features = 0;
    double fit_ms_median = 0.0;
    double fit_ms_p95 = 0.0;
    double predict_one_ms_median = 0.0;
    double predict_one_ms_p95 = 0.0;
    std::uint64_t peak_rss_bytes = 0;  // 0 when the platform counter is absent
    bool rss_supported = false;
};

/// Runs warmups, then times `repetitions` fits and single predictions.
/// Model fit errors propagate.
BenchRow bench(const ForecasterSpec& spec, const SupervisedSet& train,
               const BenchConfig& config);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);
void write_bench_jsonl(const std::vector<BenchRow>& rows, std::ostream& out);

/// Best-effort peak resident set size (VmHWM); 0 when unsupported.
std::uint64_t peak_rss_bytes();

} // namespace glycast

#endif
