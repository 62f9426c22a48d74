#include "glycast/sisal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "glycast/errors.hpp"
#include "glycast/parallel.hpp"
#include "glycast/rng.hpp"
#include "linalg.hpp"

namespace glycast {

void SelectionConfig::validate() const {
    if (resamples < 10) throw std::invalid_argument("selection: resamples >= 10");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("selection: train_fraction in (0,1)");
    }
    if (!(q_low < q_high) || q_low < 0.0 || q_high > 1.0) {
        throw std::invalid_argument("selection: need 0 <= q_low < q_high <= 1");
    }
    if (ridge_lambda < 0.0) throw std::invalid_argument("selection: ridge_lambda >= 0");
    if (sparsity_tolerance < 0.0) {
        throw std::invalid_argument("selection: sparsity_tolerance >= 0");
    }
}

namespace {

// Type-7 quantile (linear interpolation) on a scratch copy.
double quantile(std::vector<double> v, double q) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n == 1) return v[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return v[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + (v[lo + 1] - v[lo]) * frac;
}

std::vector<int> resolve_columns(const SupervisedSet& set,
                                 const std::vector<LagFeature>& active) {
    std::vector<int> cols;
    cols.reserve(active.size());
    for (const LagFeature& f : active) {
        const auto it = std::find(set.columns.begin(), set.columns.end(), f);
        if (it == set.columns.end()) {
            throw std::invalid_argument("resampled_weights: feature not in set");
        }
        cols.push_back(static_cast<int>(it - set.columns.begin()));
    }
    return cols;
}

} // namespace

WeightSamples resampled_weights(const SupervisedSet& set,
                                const std::vector<LagFeature>& active,
                                const SelectionConfig& config,
                                std::uint64_t step_index, unsigned workers) {
    config.validate();
    if (active.empty()) throw std::invalid_argument("resampled_weights: no features");
    const std::size_t n = set.n_rows();
    const std::size_t k = active.size();
    if (n <= k + 1) {
        throw DegenerateInputError("resampled_weights: need rows > features + 1");
    }
    const std::vector<int> cols = resolve_columns(set, active);

    const std::size_t B = static_cast<std::size_t>(config.resamples);
    WeightSamples out;
    out.std_weights = Matrix(B, k);
    out.raw_weights = Matrix(B, k);
    out.val_mse.assign(B, 0.0);

    std::size_t n_train = static_cast<std::size_t>(
        std::floor(config.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, k + 1, n - 1);
    const std::size_t n_val = n - n_train;

    // Active-column submatrix and its full-data moments, computed once per
    // step. Each resample derives its train-side Gram by subtracting the
    // validation block, which costs O(n_val k^2) instead of O(n_train k^2).
    Eigen::MatrixXd Xa(n, k);
    Eigen::VectorXd ya(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = set.X.row(i);
        for (std::size_t j = 0; j < k; ++j) Xa(i, j) = row[cols[j]];
        ya(i) = set.y[i];
    }
    Eigen::MatrixXd g_full = Eigen::MatrixXd::Zero(k, k);
    g_full.selfadjointView<Eigen::Lower>().rankUpdate(Xa.transpose());
    const Eigen::VectorXd sum_full = Xa.colwise().sum();
    const Eigen::VectorXd gy_full = Xa.transpose() * ya;
    const double ysum_full = ya.sum();

    parallel_for(B, workers, [&](std::size_t b) {
        Rng rng(Rng::derive(config.seed, {0x5e1ec7ULL, step_index, b}));
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = 0; i < n_train; ++i) {
            const std::size_t swap_at = i + rng.uniform_int(n - i);
            std::swap(perm[i], perm[swap_at]);
        }

        Eigen::MatrixXd Xv(n_val, k);
        Eigen::VectorXd yv(n_val);
        for (std::size_t i = 0; i < n_val; ++i) {
            Xv.row(i) = Xa.row(perm[n_train + i]);
            yv(i) = ya(perm[n_train + i]);
        }

        Eigen::MatrixXd g_train = g_full;
        g_train.selfadjointView<Eigen::Lower>().rankUpdate(Xv.transpose(), -1.0);
        const Eigen::VectorXd sum_t = sum_full - Xv.colwise().sum().transpose();
        const Eigen::VectorXd gy_t = gy_full - Xv.transpose() * yv;
        const double m = static_cast<double>(n_train);
        const Eigen::VectorXd mu = sum_t / m;
        const double y_mean = (ysum_full - yv.sum()) / m;

        // Standardized centered Gram: D^-1 (G_t - m mu mu^T) D^-1.
        Eigen::VectorXd sd(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double var = (g_train(j, j) - m * mu(j) * mu(j)) / m;
            sd(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
        Eigen::MatrixXd gs(k, k);
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c <= r; ++c) {
                const double centered = g_train(r, c) - m * mu(r) * mu(c);
                gs(r, c) = gs(c, r) = centered / (sd(r) * sd(c));
            }
            gs(r, r) += config.ridge_lambda;
        }
        const Eigen::VectorXd rhs =
            (gy_t - mu * (ysum_full - yv.sum())).cwiseQuotient(sd);

        Eigen::VectorXd w;
        if (config.ridge_lambda > 0.0) {
            w = gs.llt().solve(rhs);
        } else {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(gs);
            if (lu.rank() < static_cast<Eigen::Index>(k)) {
                throw DegenerateInputError(
                    "resampled_weights: rank-deficient design with lambda = 0");
            }
            w = lu.solve(rhs);
        }

        // Validation error of the standardized-space fit.
        const Eigen::VectorXd w_raw = w.cwiseQuotient(sd);
        const Eigen::VectorXd preds =
            ((Xv.rowwise() - mu.transpose()) * w_raw).array() + y_mean;
        out.val_mse[b] = (preds - yv).squaredNorm() / static_cast<double>(n_val);

        for (std::size_t j = 0; j < k; ++j) {
            out.std_weights(b, j) = w(j);
            out.raw_weights(b, j) = w_raw(j);
        }
    });
    return out;
}

namespace {

struct StepScores {
    std::vector<FeatureStat> stats;  // per active feature
    double mean_val_mse = 0.0;
};

StepScores score_step(const SupervisedSet& set,
                      const std::vector<LagFeature>& active,
                      const SelectionConfig& config, std::uint64_t step_index,
                      unsigned workers) {
    const WeightSamples samples =
        resampled_weights(set, active, config, step_index, workers);
    const std::size_t B = samples.val_mse.size();
    const std::size_t k = active.size();

    StepScores out;
    out.stats.resize(k);
    std::vector<double> col(B);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t b = 0; b < B; ++b) col[b] = samples.std_weights(b, j);
        FeatureStat& st = out.stats[j];
        st.feature = active[j];
        st.median = quantile(col, 0.5);
        st.width = quantile(col, config.q_high) - quantile(col, config.q_low);
        if (st.width < 1e-12) {
            st.score = std::abs(st.median) < 1e-12
                           ? 0.0
                           : std::numeric_limits<double>::infinity();
        } else {
            st.score = std::abs(st.median) / st.width;
        }
    }
    out.mean_val_mse =
        std::accumulate(samples.val_mse.begin(), samples.val_mse.end(), 0.0) /
        static_cast<double>(B);
    return out;
}

// Removal preference: lowest score first; ties prefer the larger lag, then
// earlier variable name (biases toward shorter influence windows).
bool remove_before(const FeatureStat& a, const FeatureStat& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.feature.lag_steps != b.feature.lag_steps) {
        return a.feature.lag_steps > b.feature.lag_steps;
    }
    return to_string(a.feature.variable) < to_string(b.feature.variable);
}

} // namespace

SelectionResult sisal(const SupervisedSet& set, const SelectionConfig& config,
                      unsigned workers) {
    config.validate();
    if (set.n_features() == 0) throw std::invalid_argument("sisal: no candidates");

    // Optional row subsample keeps the resample loop affordable on pooled sets.
    SupervisedSet work;
    const SupervisedSet* data = &set;
    if (config.max_rows > 0 && set.n_rows() > config.max_rows) {
        Rng rng(Rng::derive(config.seed, {0x5ab5aULL}));
        std::vector<int> perm(set.n_rows());
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = 0; i < config.max_rows; ++i) {
            const std::size_t swap_at = i + rng.uniform_int(set.n_rows() - i);
            std::swap(perm[i], perm[swap_at]);
        }
        perm.resize(config.max_rows);
        std::sort(perm.begin(), perm.end());
        work.step_s = set.step_s;
        work.horizon_steps = set.horizon_steps;
        work.columns = set.columns;
        work.X = Matrix(config.max_rows, set.n_features());
        work.y.resize(config.max_rows);
        work.row_times.resize(config.max_rows);
        for (std::size_t i = 0; i < config.max_rows; ++i) {
            const auto r = static_cast<std::size_t>(perm[i]);
            std::copy_n(set.X.row(r), set.n_features(), work.X.row(i));
            work.y[i] = set.y[r];
            work.row_times[i] = set.row_times[r];
        }
        data = &work;
    }

    SelectionResult result;
    result.step_s = set.step_s;

    std::vector<LagFeature> active = data->columns;
    std::map<LagFeature, FeatureStat> last_stats;
    std::vector<std::vector<LagFeature>> active_history;
    std::vector<std::vector<FeatureStat>> stats_history;

    for (std::uint64_t step = 0;; ++step) {
        const StepScores scores =
            score_step(*data, active, config, step, workers);
        result.validation_curve.push_back(scores.mean_val_mse);
        result.active_counts.push_back(active.size());
        active_history.push_back(active);
        stats_history.push_back(scores.stats);
        for (const FeatureStat& st : scores.stats) last_stats[st.feature] = st;

        if (active.size() == 1) break;
        const auto worst = std::min_element(scores.stats.begin(),
                                            scores.stats.end(), remove_before);
        const LagFeature removed = worst->feature;
        result.removal_order.push_back(removed);
        active.erase(std::find(active.begin(), active.end(), removed));
    }

    // Selected step: sparsest whose validation MSE is within the tolerance
    // band of the minimum over steps.
    const double best_mse = *std::min_element(result.validation_curve.begin(),
                                              result.validation_curve.end());
    const double band = (1.0 + config.sparsity_tolerance) * best_mse;
    std::size_t chosen = 0;
    for (std::size_t s = 0; s < result.validation_curve.size(); ++s) {
        if (result.validation_curve[s] <= band) chosen = s;
    }
    result.selected_step = chosen;
    result.selected_set = active_history[chosen];

    result.weight_stats.reserve(last_stats.size());
    for (const LagFeature& f : data->columns) result.weight_stats.push_back(last_stats[f]);

    // Variable ranking: retained variables by descending max score at the
    // selected step; fully removed variables by how late they were removed.
    struct RankKey {
        int retained_group;  // 0 = retained, 1 = removed
        double neg_score;
        long neg_removed_pos;
        VariableId var;
    };
    std::map<VariableId, RankKey> keys;
    for (const FeatureStat& st : stats_history[chosen]) {
        const bool in_selected =
            std::find(result.selected_set.begin(), result.selected_set.end(),
                      st.feature) != result.selected_set.end();
        if (!in_selected) continue;
        auto [it, fresh] = keys.try_emplace(
            st.feature.variable,
            RankKey{0, -st.score, 0, st.feature.variable});
        if (!fresh) it->second.neg_score = std::min(it->second.neg_score, -st.score);
    }
    for (std::size_t pos = 0; pos < result.removal_order.size(); ++pos) {
        const VariableId v = result.removal_order[pos].variable;
        if (keys.count(v)) continue;  // retained variables rank first
        auto [it, fresh] = keys.try_emplace(
            v, RankKey{1, 0.0, -static_cast<long>(pos), v});
        if (!fresh) {
            it->second.neg_removed_pos =
                std::min(it->second.neg_removed_pos, -static_cast<long>(pos));
        }
    }
    std::vector<RankKey> order;
    order.reserve(keys.size());
    for (const auto& [var, key] : keys) order.push_back(key);
    std::sort(order.begin(), order.end(), [](const RankKey& a, const RankKey& b) {
        if (a.retained_group != b.retained_group) {
            return a.retained_group < b.retained_group;
        }
        if (a.retained_group == 0 && a.neg_score != b.neg_score) {
            return a.neg_score < b.neg_score;
        }
        if (a.retained_group == 1 && a.neg_removed_pos != b.neg_removed_pos) {
            return a.neg_removed_pos < b.neg_removed_pos;
        }
        return to_string(a.var) < to_string(b.var);
    });
    for (const RankKey& key : order) result.variable_ranking.push_back(key.var);

    result.influence_duration_s = influence_durations(result, result.step_s);
    return result;
}

std::map<VariableId, std::int64_t> influence_durations(
    const SelectionResult& result, std::int64_t step_s) {
    std::map<VariableId, std::int64_t> out;
    for (const VariableId v : result.variable_ranking) out[v] = 0;
    for (const LagFeature& f : result.removal_order) out[f.variable] = 0;
    for (const LagFeature& f : result.selected_set) {
        out[f.variable] = std::max(out[f.variable],
                                   static_cast<std::int64_t>(f.lag_steps) * step_s);
    }
    return out;
}

void write_selection_jsonl(const SelectionResult& result, std::ostream& out) {
    using nlohmann::json;
    for (std::size_t s = 0; s < result.validation_curve.size(); ++s) {
        json rec;
        rec["step"] = s;
        rec["active_features"] = result.active_counts[s];
        rec["mean_val_mse"] = result.validation_curve[s];
        rec["selected"] = (s == result.selected_step);
        if (s < result.removal_order.size()) {
            rec["removed"] = {
                {"variable", std::string(to_string(result.removal_order[s].variable))},
                {"lag_steps", result.removal_order[s].lag_steps}};
        }
        out << rec.dump() << '\n';
    }
}

void write_selection_csv(const SelectionResult& result, std::ostream& out) {
    out << "variable,rank,influence_minutes\n";
    int rank = 1;
    for (const VariableId v : result.variable_ranking) {
        const auto it = result.influence_duration_s.find(v);
        const double minutes =
            it == result.influence_duration_s.end()
                ? 0.0
                : static_cast<double>(it->second) / 60.0;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f", minutes);
        out << to_string(v) << ',' << rank << ',' << buf << '\n';
        ++rank;
    }
}

} // namespace glycast
