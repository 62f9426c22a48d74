#include <doctest.h>

#include <cmath>
#include <vector>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"
#include "test_util.hpp"

using namespace glycast;
using testutil::random_set;

namespace {

// Brute-force oracle: recompute sum_i beta_i k(sv_i, x) + b in standardized
// space from the model's stored parameters, with an independent kernel.
double oracle_predict(const SvrModel& m, const std::vector<double>& raw_row) {
    std::vector<double> x(raw_row.size());
    for (std::size_t j = 0; j < raw_row.size(); ++j) {
        x[j] = (raw_row[j] - m.feature_mean()[j]) / m.feature_sd()[j];
    }
    double acc = m.bias_std();
    for (std::size_t i = 0; i < m.n_support(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double diff = m.support_vectors_std()(i, j) - x[j];
            d2 += diff * diff;
        }
        acc += m.beta()[i] * std::exp(-m.gamma() * d2);
    }
    return acc * m.y_sd() + m.y_mean();
}

// Max KKT violation of the epsilon-tube conditions, standardized space.
double kkt_violation(const SvrModel& m, const SupervisedSet& train, double C,
                     double eps) {
    const std::size_t n = train.n_rows();
    // Rebuild beta per training row: rows that are not support vectors have 0.
    // Match support vectors to training rows by standardized coordinates.
    std::vector<double> beta(n, 0.0);
    for (std::size_t s = 0; s < m.n_support(); ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            bool same = true;
            for (std::size_t j = 0; j < train.n_features(); ++j) {
                const double xs = (train.X(i, j) - m.feature_mean()[j]) /
                                  m.feature_sd()[j];
                if (std::abs(xs - m.support_vectors_std()(s, j)) > 1e-12) {
                    same = false;
                    break;
                }
            }
            if (same && beta[i] == 0.0) {
                beta[i] = m.beta()[s];
                break;
            }
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(train.n_features());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = train.X(i, j);
        const double y_std = (train.y[i] - m.y_mean()) / m.y_sd();
        std::vector<double> x(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            x[j] = (row[j] - m.feature_mean()[j]) / m.feature_sd()[j];
        }
        const double f = m.decision_std(x);
        const double resid = y_std - f;  // positive: sample above the tube
        double v = 0.0;
        if (beta[i] <= 0.0) v = std::max(v, resid - eps);       // could raise beta
        if (beta[i] >= 0.0) v = std::max(v, -resid - eps);      // could lower beta
        if (beta[i] > 0.0 && beta[i] < C) v = std::max(v, std::abs(resid - eps));
        if (beta[i] < 0.0 && beta[i] > -C) v = std::max(v, std::abs(resid + eps));
        if (beta[i] >= C) v = std::max(v, eps - resid);         // must sit above
        if (beta[i] <= -C) v = std::max(v, resid + eps);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

TEST_CASE("svr: targets inside the tube yield zero support vectors, mean bias") {
    Rng rng(41);
    auto set = random_set(
        60, 2, [](const std::vector<double>&) { return 0.0; }, 0.0, rng);
    // Targets within eps (std units) of their mean: mean 100, tiny wiggle.
    for (std::size_t i = 0; i < set.n_rows(); ++i) {
        set.y[i] = 100.0 + 0.01 * std::sin(static_cast<double>(i));
    }
    ForecasterSpec spec = ForecasterSpec::parse("svr");
    spec.svr_epsilon = 2.0;  // generous tube in standardized units
    const auto model = fit(spec, set);
    const auto& svm = static_cast<const SvrModel&>(*model);
    CHECK(svm.n_support() == 0);
    double mean = 0.0;
    for (double v : set.y) mean += v;
    mean /= set.y.size();
    const std::vector<double> probe = {0.5, -0.5};
    CHECK(model->predict_row(probe) == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("svr: KKT satisfied and oracle agreement on random sets") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const auto set = random_set(
            200, 3,
            [](const std::vector<double>& x) {
                return 40.0 * std::tanh(x[0]) - 15.0 * x[1] * x[1] + 5.0 * x[2];
            },
            1.0, rng);
        ForecasterSpec spec = ForecasterSpec::parse("svr");
        const auto model = fit(spec, set);
        const auto& svm = static_cast<const SvrModel&>(*model);
        CHECK(svm.final_kkt_violation() <= spec.svr_tol);
        CHECK(kkt_violation(svm, set, spec.svr_c, spec.svr_epsilon) <=
              spec.svr_tol + 1e-9);
        Rng probe_rng(seed + 100);
        for (int k = 0; k < 25; ++k) {
            const std::vector<double> probe = {probe_rng.uniform(-2.0, 2.0),
                                               probe_rng.uniform(-2.0, 2.0),
                                               probe_rng.uniform(-2.0, 2.0)};
            CHECK(std::abs(model->predict_row(probe) - oracle_predict(svm, probe)) <
                  1e-8);
        }
    }
}

TEST_CASE("svr: dual objective nondecreasing along the tolerance path") {
    Rng rng(43);
    const auto set = random_set(
        150, 2,
        [](const std::vector<double>& x) { return 20.0 * x[0] - 10.0 * x[1]; },
        2.0, rng);

    // Looser tolerances stop earlier on the same deterministic SMO
    // trajectory, so the dual objective must not decrease as tol tightens.
    auto dual_objective = [&](const SvrModel& m, double eps) {
        // D = -1/2 sum_ij beta_i beta_j K_ij - eps sum |beta| + sum y_i beta_i
        // over the training rows carrying nonzero beta (standardized y).
        const std::size_t ns = m.n_support();
        double quad = 0.0;
        for (std::size_t a = 0; a < ns; ++a) {
            for (std::size_t b = 0; b < ns; ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < set.n_features(); ++j) {
                    const double diff = m.support_vectors_std()(a, j) -
                                        m.support_vectors_std()(b, j);
                    d2 += diff * diff;
                }
                quad += m.beta()[a] * m.beta()[b] * std::exp(-m.gamma() * d2);
            }
        }
        double lin = 0.0, l1 = 0.0;
        for (std::size_t a = 0; a < ns; ++a) {
            // Find the matching training row to read its target.
            for (std::size_t i = 0; i < set.n_rows(); ++i) {
                bool same = true;
                for (std::size_t j = 0; j < set.n_features(); ++j) {
                    const double xs = (set.X(i, j) - m.feature_mean()[j]) /
                                      m.feature_sd()[j];
                    if (std::abs(xs - m.support_vectors_std()(a, j)) > 1e-12) {
                        same = false;
                        break;
                    }
                }
                if (same) {
                    lin += m.beta()[a] * (set.y[i] - m.y_mean()) / m.y_sd();
                    break;
                }
            }
            l1 += std::abs(m.beta()[a]);
        }
        return -0.5 * quad - eps * l1 + lin;
    };

    double prev = -std::numeric_limits<double>::infinity();
    for (const double tol : {0.5, 0.1, 0.02, 1e-3}) {
        ForecasterSpec spec = ForecasterSpec::parse("svr");
        spec.svr_tol = tol;
        const auto model = fit(spec, set);
        const double d = dual_objective(static_cast<const SvrModel&>(*model),
                                        spec.svr_epsilon);
        CHECK(d >= prev - 1e-9);
        prev = d;
    }
}

TEST_CASE("svr: predictions invariant under affine feature rescaling") {
    Rng rng(44);
    const auto set = random_set(
        120, 3, [](const std::vector<double>& x) { return 10.0 * x[0] + x[2]; },
        0.5, rng);
    SupervisedSet scaled = set;
    for (std::size_t i = 0; i < scaled.n_rows(); ++i) {
        scaled.X(i, 0) = scaled.X(i, 0) * 4.0 + 100.0;
    }
    const auto m1 = fit(ForecasterSpec::parse("svr"), set);
    const auto m2 = fit(ForecasterSpec::parse("svr"), scaled);
    for (std::size_t i = 0; i < set.n_rows(); i += 7) {
        std::vector<double> r1(3), r2(3);
        for (std::size_t j = 0; j < 3; ++j) {
            r1[j] = set.X(i, j);
            r2[j] = scaled.X(i, j);
        }
        CHECK(std::abs(m1->predict_row(r1) - m2->predict_row(r2)) < 1e-8);
    }
}

TEST_CASE("svr: non-convergence carries the final KKT violation") {
    Rng rng(45);
    const auto set = random_set(
        300, 2,
        [](const std::vector<double>& x) { return 50.0 * std::sin(3.0 * x[0]) * x[1]; },
        0.1, rng);
    ForecasterSpec spec = ForecasterSpec::parse("svr");
    spec.svr_max_iter = 3;
    try {
        fit(spec, set);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > spec.svr_tol);
    }
}
