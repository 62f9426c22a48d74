#include <doctest.h>

#include <cmath>

#include "glycast/models.hpp"
#include "test_util.hpp"

using namespace glycast;
using testutil::random_set;

TEST_CASE("rf: constant target collapses every leaf to that constant") {
    Rng rng(1);
    const auto set = random_set(
        80, 3, [](const std::vector<double>&) { return 42.0; }, 0.0, rng);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.n_trees = 10;
    const auto model = fit(spec, set);
    for (std::size_t i = 0; i < set.n_rows(); ++i) {
        CHECK(model->predict_row({set.X.row(i), set.n_features()}) == 42.0);
    }
}

TEST_CASE("rf: single tree with min_leaf = n predicts the bootstrap mean") {
    Rng rng(2);
    const auto set = random_set(
        50, 2, [](const std::vector<double>& x) { return x[0]; }, 0.5, rng);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.n_trees = 1;
    spec.min_leaf = 50;
    spec.seed = 7;
    const auto model = fit(spec, set);
    const auto& forest = static_cast<const ForestModel&>(*model);
    REQUIRE(forest.trees().size() == 1);
    REQUIRE(forest.trees()[0].size() == 1);  // root is a leaf
    const double leaf = forest.trees()[0][0].value;
    const std::vector<double> probe = {9.9, -3.0};
    CHECK(model->predict_row(probe) == leaf);
    // The bootstrap mean stays inside the target range.
    CHECK(leaf >= forest.train_target_min());
    CHECK(leaf <= forest.train_target_max());
}

TEST_CASE("rf: predictions stay within the training target range") {
    Rng rng(3);
    const auto set = random_set(
        400, 3,
        [](const std::vector<double>& x) { return 30.0 * x[0] - 20.0 * x[2]; },
        2.0, rng);
    const auto model = fit(ForecasterSpec::parse("rf"), set);
    const auto& forest = static_cast<const ForestModel&>(*model);
    Rng probe_rng(4);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> probe = {probe_rng.uniform(-10.0, 10.0),
                                           probe_rng.uniform(-10.0, 10.0),
                                           probe_rng.uniform(-10.0, 10.0)};
        const double pred = model->predict_row(probe);
        CHECK(pred >= forest.train_target_min());
        CHECK(pred <= forest.train_target_max());
    }
}

TEST_CASE("rf: identical forests for 1 and 8 workers") {
    Rng rng(5);
    const auto set = random_set(
        300, 4,
        [](const std::vector<double>& x) { return std::sin(2.0 * x[0]) + x[1]; },
        0.3, rng);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.n_trees = 16;
    spec.seed = 1234;
    const auto a = fit(spec, set, 1);
    const auto b = fit(spec, set, 8);
    const auto& fa = static_cast<const ForestModel&>(*a);
    const auto& fb = static_cast<const ForestModel&>(*b);
    REQUIRE(fa.trees().size() == fb.trees().size());
    for (std::size_t t = 0; t < fa.trees().size(); ++t) {
        REQUIRE(fa.trees()[t].size() == fb.trees()[t].size());
        for (std::size_t k = 0; k < fa.trees()[t].size(); ++k) {
            CHECK(fa.trees()[t][k].feature == fb.trees()[t][k].feature);
            CHECK(fa.trees()[t][k].threshold == fb.trees()[t][k].threshold);
            CHECK(fa.trees()[t][k].value == fb.trees()[t][k].value);
        }
    }
}

TEST_CASE("rf: different seeds grow different forests") {
    Rng rng(6);
    const auto set = random_set(
        200, 3, [](const std::vector<double>& x) { return x[0] * x[1]; }, 0.2, rng);
    ForecasterSpec a = ForecasterSpec::parse("rf");
    a.n_trees = 4;
    a.seed = 1;
    ForecasterSpec b = a;
    b.seed = 2;
    const auto ma = fit(a, set);
    const auto mb = fit(b, set);
    const std::vector<double> probe = {0.3, -0.2, 1.0};
    CHECK(ma->predict_row(probe) != mb->predict_row(probe));
}

TEST_CASE("rf: learns sin(3x) well enough to halve the target variance") {
    Rng rng(9);
    const auto train = random_set(
        1000, 1, [](const std::vector<double>& x) { return std::sin(3.0 * x[0]); },
        0.1, rng, 0.0, 2.0 * 3.141592653589793);
    const auto test = random_set(
        500, 1, [](const std::vector<double>& x) { return std::sin(3.0 * x[0]); },
        0.1, rng, 0.0, 2.0 * 3.141592653589793);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.seed = 11;
    const auto model = fit(spec, train);

    double var = 0.0, mean = 0.0;
    for (double v : test.y) mean += v;
    mean /= test.y.size();
    for (double v : test.y) var += (v - mean) * (v - mean);
    var /= test.y.size();

    double mse = 0.0;
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        const double pred = model->predict_row({test.X.row(i), 1});
        mse += (pred - test.y[i]) * (pred - test.y[i]);
    }
    mse /= test.n_rows();
    CHECK(mse <= 0.5 * var);
}

TEST_CASE("rf: max_depth 1 yields stumps") {
    Rng rng(10);
    const auto set = random_set(
        200, 2, [](const std::vector<double>& x) { return x[0] > 0 ? 10.0 : -10.0; },
        0.1, rng);
    ForecasterSpec spec = ForecasterSpec::parse("rf");
    spec.n_trees = 5;
    spec.max_depth = 1;
    const auto model = fit(spec, set);
    for (const auto& tree : static_cast<const ForestModel&>(*model).trees()) {
        CHECK(tree.size() <= 3);
    }
}
