#ifndef GLYCAST_CONFIG_HPP
#define GLYCAST_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "glycast/eval.hpp"
#include "glycast/simulator.hpp"
#include "glycast/sisal.hpp"
#include "glycast/bench.hpp"

namespace glycast {

/// Plain-text key=value configuration: one pair per line, '#' comments.
/// Consumers pull typed values; every key must be consumed or the final
/// check_unused() call reports it (unknown keys are rejected, not ignored).
/// Environment variables with the GLYCAST_ prefix override file values:
/// GLYCAST_EVAL__TRAIN_DAYS=7 sets eval.train_days (double underscore maps
/// to a dot).
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream& in, const std::string& name);
    static KeyValueConfig parse_file(const std::string& path);

    /// Applies GLYCAST_* environment overrides.
    void apply_env_overrides();

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    /// Comma-separated list.
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback);

    /// Keys that were parsed but never consumed (likely typos).
    std::vector<std::string> unused_keys() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

/// Typed sections assembled from config keys (documented in the README).
Scenario scenario_from_config(KeyValueConfig& cfg);
KernelSet kernels_from_config(KeyValueConfig& cfg);
SelectionConfig selection_from_config(KeyValueConfig& cfg);
EvalConfig eval_from_config(KeyValueConfig& cfg);
BenchConfig bench_from_config(KeyValueConfig& cfg);
ForecasterSpec forecaster_overrides_from_config(KeyValueConfig& cfg,
                                                ForecasterSpec spec);

} // namespace glycast

#endif
