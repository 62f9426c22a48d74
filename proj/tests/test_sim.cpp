#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "glycast/simulator.hpp"

using namespace glycast;

namespace {

Scenario quiet_scenario(int days = 1) {
    Scenario sc;
    sc.days = days;
    sc.meals.clear();
    sc.exercise_sessions.clear();
    sc.gap_rate_per_day = 0.0;
    return sc;
}

PatientParams quiet_params() {
    PatientParams p;
    p.cgm_noise_sd = 0.0;
    p.cgm_delay_min = 0.0;
    p.dawn_amp = 0.0;
    return p;
}

} // namespace

TEST_CASE("step_ode: equilibrium is a fixed point") {
    const PatientParams p;
    SimState s = SimState::equilibrium(p);
    for (int i = 0; i < 60; ++i) s = step_ode(s, p, {}, 60.0);
    CHECK(std::abs(s.G - p.Gb) < 1e-9);
    CHECK(std::abs(s.X) < 1e-9);
    CHECK(std::abs(s.I - p.Ib) < 1e-9);
    CHECK(s.clamp_count == 0);
}

TEST_CASE("step_ode: carbs raise glucose against the no-carb twin") {
    const PatientParams p;
    SimState fed = SimState::equilibrium(p);
    SimState fasted = fed;
    SimInputs carbs_in;
    carbs_in.carbs_impulse_g = 40.0;
    fed = step_ode(fed, p, carbs_in, 60.0);
    fasted = step_ode(fasted, p, {}, 60.0);
    for (int m = 1; m < 30; ++m) {
        fed = step_ode(fed, p, {}, 60.0);
        fasted = step_ode(fasted, p, {}, 60.0);
        CHECK(fed.G > fasted.G);
    }
}

TEST_CASE("step_ode: a bolus lowers glucose at +120 min vs the twin") {
    const PatientParams p;
    SimState dosed = SimState::equilibrium(p);
    SimState plain = dosed;
    SimInputs bolus;
    bolus.insulin_u_per_min = 2.0;  // 2 U over one minute
    dosed = step_ode(dosed, p, bolus, 60.0);
    plain = step_ode(plain, p, {}, 60.0);
    for (int m = 1; m < 120; ++m) {
        dosed = step_ode(dosed, p, {}, 60.0);
        plain = step_ode(plain, p, {}, 60.0);
    }
    CHECK(dosed.G < plain.G);
}

TEST_CASE("step_ode: input validation") {
    const PatientParams p;
    const SimState s = SimState::equilibrium(p);
    CHECK_THROWS_AS(step_ode(s, p, {}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step_ode(s, p, {}, 120.0), std::invalid_argument);
    SimInputs bad;
    bad.carbs_impulse_g = std::nan("");
    CHECK_THROWS_AS(step_ode(s, p, bad, 60.0), std::invalid_argument);
    SimInputs neg;
    neg.insulin_u_per_min = -1.0;
    CHECK_THROWS_AS(step_ode(s, p, neg, 60.0), std::invalid_argument);
}

TEST_CASE("step_ode: glucose floor engages the clamp counter") {
    PatientParams p;
    SimState s = SimState::equilibrium(p);
    SimInputs huge;
    huge.insulin_u_per_min = 50.0;
    s = step_ode(s, p, huge, 60.0);
    for (int m = 0; m < 600 && s.clamp_count == 0; ++m) {
        s = step_ode(s, p, {}, 60.0);
    }
    CHECK(s.clamp_count > 0);
    CHECK(s.G >= 20.0);
}

TEST_CASE("simulate_patient: 14 days give 4032 glucose slots") {
    PatientParams p;
    Scenario sc;
    sc.days = 14;
    const auto r = simulate_patient(p, sc, 1, "p");
    const auto* glu = r.uniform(VariableId::glucose);
    REQUIRE(glu != nullptr);
    CHECK(glu->values.size() == 4032);
    CHECK(glu->gap_count() > 0);  // injected dropouts
    CHECK(r.events(VariableId::insulin_bolus) != nullptr);
    CHECK(r.events(VariableId::carbs) != nullptr);
    CHECK(r.uniform(VariableId::heart_rate) != nullptr);
    CHECK(r.uniform(VariableId::sleep) != nullptr);
    CHECK(r.uniform(VariableId::schedule) != nullptr);
    CHECK(r.uniform(VariableId::exercise) != nullptr);
}

TEST_CASE("simulate_patient: same seed reproduces the record exactly") {
    PatientParams p;
    Scenario sc;
    sc.days = 3;
    const auto a = simulate_patient(p, sc, 99, "p");
    const auto b = simulate_patient(p, sc, 99, "p");
    const auto* ga = a.uniform(VariableId::glucose);
    const auto* gb = b.uniform(VariableId::glucose);
    REQUIRE(ga->values.size() == gb->values.size());
    for (std::size_t i = 0; i < ga->values.size(); ++i) {
        if (is_gap(ga->values[i])) {
            CHECK(is_gap(gb->values[i]));
        } else {
            CHECK(ga->values[i] == gb->values[i]);
        }
    }
    const auto c = simulate_patient(p, sc, 100, "p");
    const auto* gc = c.uniform(VariableId::glucose);
    bool any_diff = false;
    for (std::size_t i = 0; i < ga->values.size(); ++i) {
        if (is_gap(ga->values[i]) != is_gap(gc->values[i]) ||
            (!is_gap(ga->values[i]) && ga->values[i] != gc->values[i])) {
            any_diff = true;
            break;
        }
    }
    CHECK(any_diff);
}

TEST_CASE("simulate_patient: quiet scenario pins glucose to Gb") {
    const auto r = simulate_patient(quiet_params(), quiet_scenario(1), 5, "p");
    const auto* glu = r.uniform(VariableId::glucose);
    for (double v : glu->values) {
        REQUIRE(!is_gap(v));
        CHECK(std::abs(v - 110.0) < 1e-6);
    }
}

TEST_CASE("simulate_patient: dawn keeps glucose inside Gb + amp envelope") {
    PatientParams p = quiet_params();
    p.dawn_amp = 18.0;
    const auto r = simulate_patient(p, quiet_scenario(2), 5, "p");
    const auto* glu = r.uniform(VariableId::glucose);
    for (double v : glu->values) {
        CHECK(v >= p.Gb - 1e-9);
        CHECK(v <= p.Gb + p.dawn_amp + 1e-9);
    }
    const double peak = *std::max_element(glu->values.begin(), glu->values.end());
    CHECK(peak > p.Gb + 1.0);  // the bump actually does something
}

TEST_CASE("simulate_patient: larger bolus dominates pointwise (monotone dose)") {
    PatientParams p = quiet_params();
    Scenario base = quiet_scenario(1);
    base.meals = {{8.0, 60.0}};
    base.jitter = {};
    base.jitter.meal_time_sd_min = 0.0;
    base.jitter.carb_frac_sd = 0.0;

    Scenario small_dose = base;
    small_dose.bolus.carb_ratio_g_per_u = 15.0;  // 4 U
    Scenario large_dose = base;
    large_dose.bolus.carb_ratio_g_per_u = 7.5;   // 8 U

    const auto lo = simulate_patient(p, small_dose, 3, "p");
    const auto hi = simulate_patient(p, large_dose, 3, "p");
    const auto* gl = lo.uniform(VariableId::glucose);
    const auto* gh = hi.uniform(VariableId::glucose);
    // Compare over the 3 h following the 08:00 meal.
    const std::size_t from = 8 * 12;
    const std::size_t to = from + 36;
    for (std::size_t i = from; i < to; ++i) {
        CHECK(gh->values[i] <= gl->values[i] + 1e-9);
    }
}

TEST_CASE("simulate_patient: carb mass is recovered through Ra within 1%") {
    // Direct twin integration of the gut chain, single meal, quiet patient.
    PatientParams p = quiet_params();
    const double dose = 80.0;
    SimState s = SimState::equilibrium(p);
    SimInputs meal;
    meal.carbs_impulse_g = dose;
    double absorbed = 0.0;  // trapezoid over Ra in g/min
    double prev_ra = 0.0;
    s = step_ode(s, p, meal, 60.0);
    for (int m = 0; m < 720; ++m) {
        const double ra_g_per_min = p.A_g * s.Q2 / p.t_max_meal;
        absorbed += 0.5 * (prev_ra + ra_g_per_min);
        prev_ra = ra_g_per_min;
        s = step_ode(s, p, {}, 60.0);
    }
    CHECK(absorbed == doctest::Approx(p.A_g * dose).epsilon(0.01));
}

TEST_CASE("default_cohort: count, ranges, determinism") {
    const auto cohort = default_cohort(25, 7);
    CHECK(cohort.size() == 25);
    std::set<double> gbs;
    for (const auto& p : cohort) {
        CHECK(p.Gb >= 90.0);
        CHECK(p.Gb <= 140.0);
        CHECK(p.p1 >= 0.02);
        CHECK(p.p1 <= 0.04);
        p.validate();
        gbs.insert(p.Gb);
    }
    CHECK(gbs.size() == 25);  // distinct parameter sets

    const auto again = default_cohort(25, 7);
    CHECK(again[13].p3 == cohort[13].p3);
    const auto other = default_cohort(25, 8);
    CHECK(other[13].p3 != cohort[13].p3);

    CHECK(default_cohort(1, 3).size() == 1);
    CHECK_THROWS_AS(default_cohort(0, 3), std::invalid_argument);
}
