#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"
#include "linalg.hpp"

namespace glycast {

namespace {

constexpr double kRootBound = 1.001;
constexpr double kPenalty = 1e100;
constexpr int kNelderMeadCap = 5000;

std::vector<double> difference(std::span<const double> y, int d) {
    std::vector<double> w(y.begin(), y.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t t = w.size() - 1; t > 0; --t) w[t] -= w[t - 1];
        w.erase(w.begin());
    }
    return w;
}

// Conditional sum of squares: innovations start at t = p with pre-sample
// innovations zero.
double css_of(const std::vector<double>& w, double c,
              const std::vector<double>& phi, const std::vector<double>& theta,
              std::vector<double>& e_scratch) {
    const int p = static_cast<int>(phi.size());
    const int q = static_cast<int>(theta.size());
    const int n = static_cast<int>(w.size());
    e_scratch.assign(w.size(), 0.0);
    double css = 0.0;
    for (int t = p; t < n; ++t) {
        double pred = c;
        for (int i = 0; i < p; ++i) pred += phi[i] * w[t - 1 - i];
        for (int j = 0; j < q; ++j) {
            if (t - 1 - j >= p) pred += theta[j] * e_scratch[t - 1 - j];
        }
        const double e = w[t] - pred;
        e_scratch[t] = e;
        css += e * e;
    }
    return css;
}

bool admissible(const std::vector<double>& phi, const std::vector<double>& theta) {
    if (!linalg::poly_roots_outside(phi, kRootBound)) return false;
    std::vector<double> neg_theta(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) neg_theta[j] = -theta[j];
    return linalg::poly_roots_outside(neg_theta, kRootBound);
}

struct CssParams {
    double c;
    std::vector<double> phi, theta;
};

CssParams unpack(const std::vector<double>& x, int p, int q) {
    CssParams out;
    out.c = x[0];
    out.phi.assign(x.begin() + 1, x.begin() + 1 + p);
    out.theta.assign(x.begin() + 1 + p, x.begin() + 1 + p + q);
    return out;
}

// Standard Nelder-Mead; returns the best vertex. Throws ConvergenceError
// when the iteration cap is reached before the simplex collapses.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, double init_step) {
    const std::size_t dim = x0.size();
    std::vector<std::vector<double>> simplex(dim + 1, x0);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += init_step;
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(simplex[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2(dim + 1);
        std::vector<double> f2(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) {
            s2[i] = simplex[idx[i]];
            f2[i] = fv[idx[i]];
        }
        simplex.swap(s2);
        fv.swap(f2);
    };

    for (int iter = 0; iter < kNelderMeadCap; ++iter) {
        order();
        const double spread = std::abs(fv[dim] - fv[0]);
        if (spread <= 1e-12 * (1.0 + std::abs(fv[0]))) return simplex[0];

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t jj = 0; jj < dim; ++jj) centroid[jj] += simplex[i][jj];
        }
        for (double& v : centroid) v /= static_cast<double>(dim);

        auto blend = [&](double coef) {
            std::vector<double> x(dim);
            for (std::size_t jj = 0; jj < dim; ++jj) {
                x[jj] = centroid[jj] + coef * (centroid[jj] - simplex[dim][jj]);
            }
            return x;
        };

        const auto xr = blend(1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const auto xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[dim] = xe;
                fv[dim] = fe;
            } else {
                simplex[dim] = xr;
                fv[dim] = fr;
            }
        } else if (fr < fv[dim - 1]) {
            simplex[dim] = xr;
            fv[dim] = fr;
        } else {
            const auto xc = blend(fr < fv[dim] ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[dim])) {
                simplex[dim] = xc;
                fv[dim] = fc;
            } else {
                for (std::size_t i = 1; i <= dim; ++i) {
                    for (std::size_t jj = 0; jj < dim; ++jj) {
                        simplex[i][jj] = simplex[0][jj] +
                                         0.5 * (simplex[i][jj] - simplex[0][jj]);
                    }
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    throw ConvergenceError("arima: Nelder-Mead hit the iteration cap", 0.0);
}

} // namespace

ArimaModel::ArimaModel(std::int64_t step_s, int p, int d, int q,
                       std::vector<double> phi, std::vector<double> theta,
                       double intercept, double sigma2, double css,
                       std::size_t n_obs)
    : p_(p), d_(d), q_(q), phi_(std::move(phi)), theta_(std::move(theta)),
      intercept_(intercept), sigma2_(sigma2), css_(css), n_obs_(n_obs) {
    step_s_ = step_s;
    horizon_steps_ = 1;
}

double ArimaModel::aic() const {
    const double m = static_cast<double>(n_obs_) - p_;
    const double k = static_cast<double>(p_ + q_ + 1);
    return m * std::log(std::max(css_ / m, 1e-300)) + 2.0 * k;
}

double ArimaModel::forecast_recursive(std::span<const double> history, int h) const {
    if (h < 1) throw std::invalid_argument("arima: h >= 1");
    if (static_cast<int>(history.size()) < p_ + d_ + 1) {
        throw std::invalid_argument("arima: history shorter than p + d + 1");
    }
    for (double v : history) {
        if (std::isnan(v)) throw std::invalid_argument("arima: gap in history");
    }

    // Difference pyramid over the history; keep the last value per level so
    // levels can be rebuilt while stepping forward.
    std::vector<std::vector<double>> pyr(d_ + 1);
    pyr[0].assign(history.begin(), history.end());
    for (int k = 1; k <= d_; ++k) pyr[k] = difference(history, k);

    std::vector<double> w = pyr[d_];
    std::vector<double> e;
    css_of(w, intercept_, phi_, theta_, e);

    std::vector<double> last(d_ + 1);
    for (int k = 0; k <= d_; ++k) last[k] = pyr[k].back();

    const int n0 = static_cast<int>(w.size());
    double level = last[0];
    for (int step = 0; step < h; ++step) {
        const int t = n0 + step;
        double next = intercept_;
        for (int i = 0; i < p_; ++i) next += phi_[i] * w[t - 1 - i];
        for (int j = 0; j < q_; ++j) {
            const int tj = t - 1 - j;
            if (tj >= p_ && tj < n0) next += theta_[j] * e[tj];
            // future innovations are zero
        }
        w.push_back(next);
        // Undifference: climb the pyramid from w up to levels.
        double v = next;
        for (int k = d_ - 1; k >= 0; --k) {
            v = last[k] + v;
            last[k] = v;
        }
        if (d_ > 0) last[d_] = next;
        level = d_ > 0 ? last[0] : next;
    }
    return level;
}

std::unique_ptr<TrainedModel> fit_arima(std::span<const double> levels,
                                        std::int64_t step_s, int p, int d, int q) {
    if (p < 0 || p > 5 || q < 0 || q > 5 || d < 0 || d > 2) {
        throw std::invalid_argument("arima: need p,q in [0,5], d in [0,2]");
    }
    const int n = static_cast<int>(levels.size());
    if (n <= 10 * (p + q + 1)) {
        throw std::invalid_argument("arima: series too short (need > 10*(p+q+1))");
    }
    for (double v : levels) {
        if (std::isnan(v)) throw std::invalid_argument("arima: series has gaps");
    }

    const std::vector<double> w = difference(levels, d);
    const int m = static_cast<int>(w.size());
    if (m <= p + 1) throw std::invalid_argument("arima: too few differenced points");

    // AR-only (and the degenerate (0,d,0)) in closed form by least squares.
    double c = 0.0;
    std::vector<double> phi(p, 0.0), theta(q, 0.0);
    {
        Matrix A(m - p, p + 1);
        std::vector<double> b(m - p);
        for (int t = p; t < m; ++t) {
            A(t - p, 0) = 1.0;
            for (int i = 0; i < p; ++i) A(t - p, i + 1) = w[t - 1 - i];
            b[t - p] = w[t];
        }
        const auto sol = linalg::lstsq(A, b);
        c = sol[0];
        for (int i = 0; i < p; ++i) phi[i] = sol[i + 1];
    }

    std::vector<double> e_scratch;
    if (q > 0) {
        auto objective = [&](const std::vector<double>& x) {
            const CssParams cp = unpack(x, p, q);
            if (!admissible(cp.phi, cp.theta)) return kPenalty;
            return css_of(w, cp.c, cp.phi, cp.theta, e_scratch);
        };
        std::vector<double> x0(1 + p + q, 0.0);
        x0[0] = c;
        for (int i = 0; i < p; ++i) x0[1 + i] = phi[i];
        if (!admissible(phi, theta)) {
            // Shrink the AR start into the admissible region.
            for (int i = 0; i < p; ++i) x0[1 + i] *= 0.5;
        }
        const auto best = nelder_mead(objective, x0, 0.1);
        const CssParams cp = unpack(best, p, q);
        c = cp.c;
        phi = cp.phi;
        theta = cp.theta;
    }

    const double css = css_of(w, c, phi, theta, e_scratch);
    const double sigma2 = css / static_cast<double>(m - p);
    return std::make_unique<ArimaModel>(step_s, p, d, q, std::move(phi),
                                        std::move(theta), c, sigma2, css,
                                        static_cast<std::size_t>(m));
}

std::unique_ptr<TrainedModel> fit_arima(const UniformSeries& series, int p,
                                        int d, int q) {
    if (series.gap_count() > 0) {
        throw std::invalid_argument("arima: series has gaps");
    }
    return fit_arima(series.values, series.step_s, p, d, q);
}

std::unique_ptr<TrainedModel> fit_arima_auto(std::span<const double> levels,
                                             std::int64_t step_s, int max_pq) {
    std::unique_ptr<TrainedModel> best;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= 1; ++d) {
        for (int p = 0; p <= max_pq; ++p) {
            for (int q = 0; q <= max_pq; ++q) {
                try {
                    auto model = fit_arima(levels, step_s, p, d, q);
                    const double aic =
                        static_cast<const ArimaModel&>(*model).aic();
                    if (aic < best_aic - 1e-9) {
                        best_aic = aic;
                        best = std::move(model);
                    }
                } catch (const std::exception&) {
                    // inadmissible or non-converged order: skip
                }
            }
        }
    }
    if (!best) throw DegenerateInputError("arima: no admissible order found");
    return best;
}

} // namespace glycast
