#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"
#include "linalg.hpp"

namespace glycast {

SvrModel::SvrModel(std::vector<LagFeature> columns, std::int64_t step_s,
                   int horizon_steps, double gamma,
                   std::vector<double> feature_mean,
                   std::vector<double> feature_sd, double y_mean, double y_sd,
                   Matrix support_std, std::vector<double> beta,
                   double bias_std, double final_kkt_violation, long iterations)
    : gamma_(gamma),
      mean_(std::move(feature_mean)),
      sd_(std::move(feature_sd)),
      y_mean_(y_mean),
      y_sd_(y_sd),
      sv_(std::move(support_std)),
      beta_(std::move(beta)),
      bias_(bias_std),
      kkt_(final_kkt_violation),
      iters_(iterations) {
    columns_ = std::move(columns);
    step_s_ = step_s;
    horizon_steps_ = horizon_steps;
}

double SvrModel::decision_std(std::span<const double> x_std) const {
    const std::size_t p = columns_.size();
    double acc = bias_;
    for (std::size_t i = 0; i < beta_.size(); ++i) {
        const double* sv = sv_.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double diff = sv[j] - x_std[j];
            d2 += diff * diff;
        }
        acc += beta_[i] * std::exp(-gamma_ * d2);
    }
    return acc;
}

double SvrModel::predict_row(std::span<const double> row) const {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument("svr: row/column mismatch");
    }
    std::vector<double> x(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        x[j] = (row[j] - mean_[j]) / sd_[j];
    }
    return decision_std(x) * y_sd_ + y_mean_;
}

namespace {

// Kernel row provider with an LRU-bounded cache of full rows.
class KernelCache {
public:
    KernelCache(const std::vector<double>& X, std::size_t n, std::size_t p,
                double gamma, std::size_t budget_bytes)
        : X_(X), n_(n), p_(p), gamma_(gamma) {
        sq_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* xi = &X_[i * p_];
            double s = 0.0;
            for (std::size_t j = 0; j < p_; ++j) s += xi[j] * xi[j];
            sq_[i] = s;
        }
        max_rows_ = std::max<std::size_t>(2, budget_bytes / (n_ * sizeof(double)));
    }

    const std::vector<double>& row(std::size_t i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.first);
            return it->second.second;
        }
        if (map_.size() >= max_rows_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            map_.erase(victim);
        }
        lru_.push_front(i);
        auto& entry = map_[i];
        entry.first = lru_.begin();
        entry.second = compute_row(i);
        return entry.second;
    }

private:
    std::vector<double> compute_row(std::size_t i) const {
        std::vector<double> k(n_);
        const double* xi = &X_[i * p_];
        for (std::size_t m = 0; m < n_; ++m) {
            const double* xm = &X_[m * p_];
            double dot = 0.0;
            for (std::size_t j = 0; j < p_; ++j) dot += xi[j] * xm[j];
            k[m] = std::exp(-gamma_ * (sq_[i] + sq_[m] - 2.0 * dot));
        }
        return k;
    }

    const std::vector<double>& X_;
    std::size_t n_, p_;
    double gamma_;
    std::vector<double> sq_;
    std::size_t max_rows_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::list<std::size_t>::iterator,
                                              std::vector<double>>> map_;
};

constexpr double kTau = 1e-12;

} // namespace

std::unique_ptr<TrainedModel> fit_svr(const ForecasterSpec& spec,
                                      const SupervisedSet& train) {
    const std::size_t n = train.n_rows();
    const std::size_t p = train.n_features();
    if (n == 0) throw EmptySetError("svr: empty training set");

    const double gamma = spec.svr_gamma > 0.0
                             ? spec.svr_gamma
                             : 1.0 / static_cast<double>(p);
    const double C = spec.svr_c;
    const double eps = spec.svr_epsilon;

    // Standardize features and target; epsilon lives in standardized target
    // units.
    std::vector<int> rows(n), cols(p);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    const auto stats = linalg::column_stats(train.X, rows, cols);
    const double y_mean = linalg::mean_of(train.y, rows);
    double y_var = 0.0;
    for (double v : train.y) y_var += (v - y_mean) * (v - y_mean);
    y_var /= static_cast<double>(n);
    const double y_sd = y_var > 1e-24 ? std::sqrt(y_var) : 1.0;

    std::vector<double> Xs(n * p);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = train.X.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            Xs[i * p + j] = (row[j] - stats.mean[j]) / stats.sd[j];
        }
        ys[i] = (train.y[i] - y_mean) / y_sd;
    }

    KernelCache cache(Xs, n, p, gamma, std::size_t{256} << 20);

    // SMO over 2n variables: au[m] is alpha (raises the fit at m), ad[m] is
    // alpha* (lowers it); beta_m = au[m] - ad[m]. fwork_m tracks
    // sum_u beta_u K(m,u) exactly for active samples. Bounded variables that
    // sit safely outside the current violation band are shrunk out of the
    // scan/update set; before any convergence claim fwork is reconstructed
    // and the full set rechecked, so the returned KKT state is exact.
    std::vector<double> au(n, 0.0), ad(n, 0.0);
    std::vector<double> fwork(n, 0.0);
    std::vector<std::uint8_t> act_up(n, 1), act_dn(n, 1);
    std::vector<std::size_t> act_samples(n);
    std::iota(act_samples.begin(), act_samples.end(), 0);

    struct Pick {
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i = 0, j = 0;      // sample indices
        bool i_up_side = true;         // alpha (true) or alpha* (false)
        bool j_up_side = true;
        bool found_i = false, found_j = false;
        double violation() const {
            return found_i && found_j
                       ? up_best - low_best
                       : -std::numeric_limits<double>::infinity();
        }
    };
    auto select_pair = [&]() {
        Pick pk;
        for (const std::size_t m : act_samples) {
            const double g = ys[m] - fwork[m];
            if (act_up[m]) {
                const double v = g - eps;
                if (au[m] < C && v > pk.up_best) {
                    pk.up_best = v;
                    pk.i = m;
                    pk.i_up_side = true;
                    pk.found_i = true;
                }
                if (au[m] > 0.0 && v < pk.low_best) {
                    pk.low_best = v;
                    pk.j = m;
                    pk.j_up_side = true;
                    pk.found_j = true;
                }
            }
            if (act_dn[m]) {
                const double v = g + eps;
                if (ad[m] > 0.0 && v > pk.up_best) {
                    pk.up_best = v;
                    pk.i = m;
                    pk.i_up_side = false;
                    pk.found_i = true;
                }
                if (ad[m] < C && v < pk.low_best) {
                    pk.low_best = v;
                    pk.j = m;
                    pk.j_up_side = false;
                    pk.found_j = true;
                }
            }
        }
        return pk;
    };

    auto rebuild_active_samples = [&]() {
        act_samples.clear();
        for (std::size_t m = 0; m < n; ++m) {
            if (act_up[m] || act_dn[m]) act_samples.push_back(m);
        }
    };

    auto unshrink = [&]() {
        // Exact fwork reconstruction for samples that were dropped.
        std::vector<std::size_t> inactive;
        for (std::size_t m = 0; m < n; ++m) {
            if (!act_up[m] && !act_dn[m]) {
                inactive.push_back(m);
                fwork[m] = 0.0;
            }
        }
        if (!inactive.empty()) {
            for (std::size_t j = 0; j < n; ++j) {
                const double b = au[j] - ad[j];
                if (b == 0.0) continue;
                const auto& kj = cache.row(j);
                for (const std::size_t m : inactive) fwork[m] += b * kj[m];
            }
        }
        std::fill(act_up.begin(), act_up.end(), 1);
        std::fill(act_dn.begin(), act_dn.end(), 1);
        rebuild_active_samples();
    };

    const long shrink_interval = std::max<long>(1000, static_cast<long>(n));
    long next_shrink = shrink_interval;
    bool everything_active = true;

    long iter = 0;
    double violation = 0.0;
    for (;;) {
        Pick pk = select_pair();
        if (pk.violation() <= spec.svr_tol) {
            if (!everything_active) {
                unshrink();
                everything_active = true;
                pk = select_pair();
            }
            if (pk.violation() <= spec.svr_tol) {
                violation = std::max(pk.violation(), 0.0);
                break;
            }
        }
        violation = pk.violation();
        if (iter >= spec.svr_max_iter) {
            if (!everything_active) {
                unshrink();
                violation = std::max(select_pair().violation(), 0.0);
            }
            throw ConvergenceError(
                "svr: SMO not converged after " + std::to_string(iter) +
                    " iterations (KKT violation " + std::to_string(violation) + ")",
                violation);
        }

        const std::size_t im = pk.i;
        const std::size_t jm = pk.j;
        const double si = pk.i_up_side ? 1.0 : -1.0;
        const double sj = pk.j_up_side ? 1.0 : -1.0;
        const double r = si * sj;
        double& ai = pk.i_up_side ? au[im] : ad[im];
        double& aj = pk.j_up_side ? au[jm] : ad[jm];

        const auto& ki = cache.row(im);
        const double kij = ki[jm];
        const double eta = std::max(2.0 * (1.0 - kij), kTau);

        // Move ai by lambda and aj by -r*lambda along the equality
        // constraint; the unconstrained optimum is si*(v_i - v_j)/eta.
        double lambda = si * (pk.up_best - pk.low_best) / eta;
        double lo = -ai;
        double hi = C - ai;
        if (r > 0.0) {
            lo = std::max(lo, aj - C);
            hi = std::min(hi, aj);
        } else {
            lo = std::max(lo, -aj);
            hi = std::min(hi, C - aj);
        }
        lambda = std::clamp(lambda, lo, hi);
        if (lambda == 0.0) {
            throw ConvergenceError("svr: SMO stalled (KKT violation " +
                                       std::to_string(violation) + ")",
                                   violation);
        }

        ai += lambda;
        aj -= r * lambda;

        const double dbeta_i = si * lambda;
        const double dbeta_j = sj * (-r * lambda);
        const auto& kj = cache.row(jm);
        if (im == jm) {
            const double d = dbeta_i + dbeta_j;
            for (const std::size_t m : act_samples) fwork[m] += d * ki[m];
        } else {
            for (const std::size_t m : act_samples) {
                fwork[m] += dbeta_i * ki[m] + dbeta_j * kj[m];
            }
        }
        ++iter;

        if (iter >= next_shrink) {
            next_shrink = iter + shrink_interval;
            // Drop bounded variables sitting outside the violation band.
            for (const std::size_t m : act_samples) {
                const double g = ys[m] - fwork[m];
                if (act_up[m]) {
                    const double v = g - eps;
                    const bool off = (au[m] <= 0.0 && v < pk.low_best) ||
                                     (au[m] >= C && v > pk.up_best);
                    if (off) act_up[m] = 0;
                }
                if (act_dn[m]) {
                    const double v = g + eps;
                    const bool off = (ad[m] <= 0.0 && v > pk.up_best) ||
                                     (ad[m] >= C && v < pk.low_best);
                    if (off) act_dn[m] = 0;
                }
            }
            rebuild_active_samples();
            everything_active = act_samples.size() == n;
        }
    }

    // Bias: average the margin condition over free variables, else the
    // midpoint of the feasible interval (fwork is exact everywhere here).
    double bias;
    {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (std::size_t m = 0; m < n; ++m) {
            const double g = ys[m] - fwork[m];
            if (au[m] > 0.0 && au[m] < C) {
                sum += g - eps;
                ++cnt;
            }
            if (ad[m] > 0.0 && ad[m] < C) {
                sum += g + eps;
                ++cnt;
            }
        }
        if (cnt > 0) {
            bias = sum / static_cast<double>(cnt);
        } else {
            double up_best = -std::numeric_limits<double>::infinity();
            double low_best = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < n; ++m) {
                const double g = ys[m] - fwork[m];
                if (au[m] < C) up_best = std::max(up_best, g - eps);
                if (au[m] > 0.0) low_best = std::min(low_best, g - eps);
                if (ad[m] > 0.0) up_best = std::max(up_best, g + eps);
                if (ad[m] < C) low_best = std::min(low_best, g + eps);
            }
            bias = (up_best + low_best) / 2.0;
        }
    }

    // Gather support vectors (beta != 0). With none, a flat function is
    // feasible: predict the training-target mean.
    std::vector<double> beta;
    std::vector<std::size_t> sv_rows;
    for (std::size_t m = 0; m < n; ++m) {
        const double b = au[m] - ad[m];
        if (b != 0.0) {
            beta.push_back(b);
            sv_rows.push_back(m);
        }
    }
    if (beta.empty()) {
        // mean(ys) = 0 by construction; clamp into the feasible bias band.
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) {
            lo = std::max(lo, ys[m] - eps);
            hi = std::min(hi, ys[m] + eps);
        }
        bias = lo <= hi ? std::clamp(0.0, lo, hi) : bias;
    }

    Matrix sv(sv_rows.size(), p);
    for (std::size_t s = 0; s < sv_rows.size(); ++s) {
        std::copy_n(&Xs[sv_rows[s] * p], p, sv.row(s));
    }

    return std::make_unique<SvrModel>(train.columns, train.step_s,
                                      train.horizon_steps, gamma, stats.mean,
                                      stats.sd, y_mean, y_sd, std::move(sv),
                                      std::move(beta), bias, violation, iter);
}

} // namespace glycast
