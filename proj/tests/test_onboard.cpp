#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "glycast/onboard.hpp"
#include "glycast/rng.hpp"

using namespace glycast;

namespace {

const Timestamp t0 = make_timestamp(2021, 3, 1);

// Midpoint quadrature of the activity curve over [0, upto]; midpoints never
// touch the jump at tau = duration.
double integrate_activity(const Kernel& k, double upto, int n = 40000) {
    const double h = upto / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += activity_fraction(k, (i + 0.5) * h);
    }
    return acc * h;
}

EventSeries random_boluses(Rng& rng, int count, std::int64_t span_s) {
    EventSeries ev;
    ev.variable = VariableId::insulin_bolus;
    Timestamp t = t0;
    for (int i = 0; i < count; ++i) {
        t = t + 60 + static_cast<std::int64_t>(rng.uniform_int(
                         static_cast<std::uint64_t>(span_s / count)));
        ev.events.push_back({t, rng.uniform(0.5, 8.0)});
    }
    return ev;
}

} // namespace

TEST_CASE("remaining_fraction: boundary values for both shapes") {
    for (const Kernel& k : {Kernel::insulin_default(), Kernel::exercise_default()}) {
        CHECK(remaining_fraction(k, 0.0) == doctest::Approx(1.0));
        CHECK(remaining_fraction(k, k.duration_s) == 0.0);
        CHECK(remaining_fraction(k, k.duration_s * 2) == 0.0);
        CHECK_THROWS_AS(remaining_fraction(k, -1.0), std::invalid_argument);
    }
}

TEST_CASE("remaining_fraction: linear decay at quarter duration") {
    Kernel k{Kernel::Shape::linear_decay, 4.0 * 3600.0, 0.0};
    CHECK(remaining_fraction(k, 3600.0) == doctest::Approx(0.75));
}

TEST_CASE("remaining_fraction: nonincreasing, activity nonnegative") {
    for (const Kernel& k : {Kernel::insulin_default(), Kernel::carbs_default(),
                            Kernel::exercise_default()}) {
        double prev = 1.0;
        for (int i = 1; i <= 500; ++i) {
            const double age = k.duration_s * i / 500.0;
            const double r = remaining_fraction(k, age);
            CHECK(r <= prev + 1e-12);
            CHECK(activity_fraction(k, age) >= 0.0);
            prev = r;
        }
    }
}

TEST_CASE("kernel consistency: r(tau) + integral of activity equals 1") {
    for (const Kernel& k : {Kernel::insulin_default(), Kernel::exercise_default()}) {
        for (const double frac : {0.1, 0.3, 0.5, 0.9, 1.0}) {
            const double tau = k.duration_s * frac;
            const double lhs = remaining_fraction(k, tau) + integrate_activity(k, tau);
            CHECK(lhs == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("kernel: bi-exponential peaks at peak_s") {
    const Kernel k = Kernel::insulin_default();
    const double at_peak = activity_fraction(k, k.peak_s);
    CHECK(activity_fraction(k, k.peak_s * 0.5) < at_peak);
    CHECK(activity_fraction(k, k.peak_s * 2.0) < at_peak);
    CHECK_THROWS_AS((Kernel{Kernel::Shape::bi_exponential, 100.0, 200.0}.validate()),
                    std::invalid_argument);
}

TEST_CASE("onboard: no events give zeros") {
    EventSeries ev;
    ev.variable = VariableId::insulin_bolus;
    const auto ob = onboard(ev, Kernel::insulin_default(), {t0, 300, 24});
    for (double v : ob.values) CHECK(v == 0.0);
    CHECK(ob.variable == VariableId::iob);
}

TEST_CASE("onboard: unit bolus at grid start evaluates to 1 there") {
    EventSeries ev;
    ev.variable = VariableId::insulin_bolus;
    ev.events = {{t0, 1.0}};
    const auto ob = onboard(ev, Kernel::insulin_default(), {t0, 300, 12});
    CHECK(ob.values[0] == doctest::Approx(1.0));
    CHECK(ob.values[1] < 1.0);
}

TEST_CASE("onboard: two boluses equal the sum of single-bolus runs") {
    const GridSpec grid{t0, 300, 72};
    const Kernel k = Kernel::insulin_default();
    EventSeries both, first, second;
    both.variable = first.variable = second.variable = VariableId::insulin_bolus;
    first.events = {{t0 + 600, 2.0}};
    second.events = {{t0 + 5400, 3.0}};
    both.events = {{t0 + 600, 2.0}, {t0 + 5400, 3.0}};
    const auto ob_both = onboard(both, k, grid);
    const auto ob_1 = onboard(first, k, grid);
    const auto ob_2 = onboard(second, k, grid);
    for (std::size_t i = 0; i < grid.n; ++i) {
        CHECK(std::abs(ob_both.values[i] - (ob_1.values[i] + ob_2.values[i])) < 1e-12);
    }
}

TEST_CASE("onboard: superposition over randomized event sets") {
    Rng rng(101);
    const GridSpec grid{t0, 300, 288};
    const Kernel k = Kernel::insulin_default();
    for (int trial = 0; trial < 20; ++trial) {
        const auto e1 = random_boluses(rng, 12, 80000);
        const auto e2 = random_boluses(rng, 9, 80000);
        EventSeries merged;
        merged.variable = VariableId::insulin_bolus;
        std::size_t i = 0, j = 0;
        while (i < e1.events.size() || j < e2.events.size()) {
            if (j >= e2.events.size() ||
                (i < e1.events.size() && e1.events[i].time < e2.events[j].time)) {
                merged.events.push_back(e1.events[i++]);
            } else {
                merged.events.push_back(e2.events[j++]);
            }
        }
        const auto u = onboard(merged, k, grid);
        const auto a = onboard(e1, k, grid);
        const auto b = onboard(e2, k, grid);
        for (std::size_t s = 0; s < grid.n; ++s) {
            CHECK(std::abs(u.values[s] - (a.values[s] + b.values[s])) < 1e-12);
        }
    }
}

TEST_CASE("onboard: scaling equivariance and conservation") {
    Rng rng(55);
    const GridSpec grid{t0, 300, 200};
    const Kernel k = Kernel::carbs_default();
    auto ev = random_boluses(rng, 10, 40000);
    ev.variable = VariableId::carbs;
    auto doubled = ev;
    for (auto& e : doubled.events) e.value *= 2.0;
    const auto ob = onboard(ev, k, grid);
    const auto ob2 = onboard(doubled, k, grid);
    double total = 0.0;
    for (const auto& e : ev.events) total += e.value;
    for (std::size_t i = 0; i < grid.n; ++i) {
        CHECK(ob2.values[i] == 2.0 * ob.values[i]);
        CHECK(ob.values[i] >= 0.0);
        CHECK(ob.values[i] <= total + 1e-12);
    }
}

TEST_CASE("onboard: a single event decays to zero past its duration") {
    EventSeries ev;
    ev.variable = VariableId::insulin_bolus;
    ev.events = {{t0, 4.0}};
    const Kernel k = Kernel::insulin_default();  // 5 h
    const auto ob = onboard(ev, k, {t0, 300, 72});  // 6 h span
    CHECK(ob.values[0] == doctest::Approx(4.0));
    const std::size_t past = static_cast<std::size_t>(k.duration_s / 300) + 1;
    for (std::size_t i = past; i < 72; ++i) CHECK(ob.values[i] == 0.0);
}

TEST_CASE("activity: finite-difference of onboard matches activity") {
    EventSeries ev;
    ev.variable = VariableId::insulin_bolus;
    ev.events = {{t0, 5.0}};
    const Kernel k = Kernel::insulin_default();
    const GridSpec grid{t0, 60, 280};
    const auto act = activity(ev, k, grid);
    const double h = 0.5;  // seconds, central difference on the closed form
    for (std::size_t i = 10; i < 270; ++i) {
        const double age = static_cast<double>(grid.time_at(i) - t0);
        const double num = -(remaining_fraction(k, age + h) -
                             remaining_fraction(k, age - h)) / (2.0 * h) * 5.0;
        CHECK(act.values[i] == doctest::Approx(num).epsilon(1e-6));
    }
}

TEST_CASE("activity: integrates back to the dose") {
    const Kernel k = Kernel::carbs_default();
    CHECK(integrate_activity(k, k.duration_s) == doctest::Approx(1.0).epsilon(1e-3));
    const Kernel lin = Kernel::exercise_default();
    CHECK(integrate_activity(lin, lin.duration_s) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("activity: no events give zeros") {
    EventSeries ev;
    ev.variable = VariableId::carbs;
    const auto a = activity(ev, Kernel::carbs_default(), {t0, 300, 10});
    for (double v : a.values) CHECK(v == 0.0);
}
