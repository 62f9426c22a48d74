#include "glycast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "glycast/rng.hpp"

namespace glycast {

void PatientParams::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("params: ") + name +
                                        " must be positive and finite");
        }
    };
    pos(p1, "p1");
    pos(p2, "p2");
    pos(p3, "p3");
    pos(n_clr, "n_clr");
    pos(V_g, "V_g");
    pos(V_i, "V_i");
    pos(t_max_meal, "t_max_meal");
    pos(Ib, "Ib");
    if (!(A_g > 0.0 && A_g <= 1.0)) throw std::invalid_argument("params: A_g in (0,1]");
    if (!(Gb >= 70.0 && Gb <= 180.0)) throw std::invalid_argument("params: Gb in [70,180]");
    if (cgm_noise_sd < 0.0) throw std::invalid_argument("params: cgm_noise_sd >= 0");
    if (cgm_delay_min < 0.0) throw std::invalid_argument("params: cgm_delay_min >= 0");
    if (dawn_amp < 0.0) throw std::invalid_argument("params: dawn_amp >= 0");
}

void Scenario::validate() const {
    if (days < 1) throw std::invalid_argument("scenario: days >= 1");
    for (const auto& m : meals) {
        if (m.carbs_g < 0.0) throw std::invalid_argument("scenario: meal carbs >= 0");
        if (m.hour < 0.0 || m.hour >= 24.0) throw std::invalid_argument("scenario: meal hour in [0,24)");
    }
    for (const auto& e : exercise_sessions) {
        if (e.intensity < 0.0 || e.intensity > 1.0) {
            throw std::invalid_argument("scenario: intensity in [0,1]");
        }
        if (e.duration_min <= 0.0) throw std::invalid_argument("scenario: duration > 0");
    }
    if (gap_rate_per_day < 0.0) throw std::invalid_argument("scenario: gap rate >= 0");
    if (gap_min_minutes > gap_max_minutes) {
        throw std::invalid_argument("scenario: gap_min <= gap_max");
    }
}

double dawn_rate(const PatientParams& params, double hour_of_day) {
    // Support [4, 8), peak at 6. The p1 factor makes the quasi-static shift
    // equal dawn_amp * bump (glucose effectiveness pulls back at rate p1).
    const double x = hour_of_day - 6.0;
    if (x <= -2.0 || x >= 2.0) return 0.0;
    const double bump = 0.5 * (1.0 + std::cos(std::numbers::pi * x / 2.0));
    return params.p1 * params.dawn_amp * bump;
}

namespace {

struct Deriv {
    double dG, dX, dI, dQ1, dQ2;
};

Deriv derivs(const SimState& s, const PatientParams& p, const SimInputs& in,
             double insulin_resistance) {
    const double Ra = p.A_g * s.Q2 * 1000.0 / p.t_max_meal;  // mg/min
    const double uptake = s.X * s.G * (1.0 + 2.0 * in.exercise_intensity);
    Deriv d;
    d.dG = -p.p1 * (s.G - p.Gb) - uptake + Ra / p.V_g + in.dawn_mg_dl_per_min;
    d.dX = -p.p2 * s.X + (p.p3 / insulin_resistance) * (s.I - p.Ib);
    d.dI = -p.n_clr * (s.I - p.Ib) + 1000.0 * in.insulin_u_per_min / p.V_i;
    d.dQ1 = -s.Q1 / p.t_max_meal;
    d.dQ2 = (s.Q1 - s.Q2) / p.t_max_meal;
    return d;
}

SimState advance(const SimState& s, const Deriv& d, double h) {
    SimState r = s;
    r.G += h * d.dG;
    r.X += h * d.dX;
    r.I += h * d.dI;
    r.Q1 += h * d.dQ1;
    r.Q2 += h * d.dQ2;
    return r;
}

SimState rk4(const SimState& s, const PatientParams& p, const SimInputs& in,
             double dt_min, double resistance) {
    const Deriv k1 = derivs(s, p, in, resistance);
    const Deriv k2 = derivs(advance(s, k1, dt_min / 2.0), p, in, resistance);
    const Deriv k3 = derivs(advance(s, k2, dt_min / 2.0), p, in, resistance);
    const Deriv k4 = derivs(advance(s, k3, dt_min), p, in, resistance);
    SimState r = s;
    r.G += dt_min / 6.0 * (k1.dG + 2.0 * k2.dG + 2.0 * k3.dG + k4.dG);
    r.X += dt_min / 6.0 * (k1.dX + 2.0 * k2.dX + 2.0 * k3.dX + k4.dX);
    r.I += dt_min / 6.0 * (k1.dI + 2.0 * k2.dI + 2.0 * k3.dI + k4.dI);
    r.Q1 += dt_min / 6.0 * (k1.dQ1 + 2.0 * k2.dQ1 + 2.0 * k3.dQ1 + k4.dQ1);
    r.Q2 += dt_min / 6.0 * (k1.dQ2 + 2.0 * k2.dQ2 + 2.0 * k3.dQ2 + k4.dQ2);
    return r;
}

SimState clamp_state(SimState s) {
    if (s.G < 20.0) {
        s.G = 20.0;
        ++s.clamp_count;
    }
    s.X = std::max(0.0, s.X);
    s.I = std::max(0.0, s.I);
    s.Q1 = std::max(0.0, s.Q1);
    s.Q2 = std::max(0.0, s.Q2);
    return s;
}

} // namespace

SimState step_ode(const SimState& state, const PatientParams& params,
                  const SimInputs& inputs, double dt_s) {
    params.validate();
    if (!(dt_s > 0.0) || dt_s > 60.0) {
        throw std::invalid_argument("step_ode: dt_s must be in (0, 60]");
    }
    if (!std::isfinite(inputs.insulin_u_per_min) ||
        !std::isfinite(inputs.carbs_impulse_g) ||
        !std::isfinite(inputs.exercise_intensity) ||
        !std::isfinite(inputs.dawn_mg_dl_per_min)) {
        throw std::invalid_argument("step_ode: non-finite input");
    }
    if (inputs.insulin_u_per_min < 0.0 || inputs.carbs_impulse_g < 0.0) {
        throw std::invalid_argument("step_ode: negative dose input");
    }

    SimState s = state;
    s.Q1 += inputs.carbs_impulse_g;
    s = rk4(s, params, inputs, dt_s / 60.0, 1.0);
    return clamp_state(s);
}

namespace {

constexpr std::int64_t kStepS = 300;     // CGM cadence
constexpr std::int64_t kOdeDtS = 60;     // integration step
const Timestamp kEpochStart = make_timestamp(2021, 3, 1);

struct DayPlan {
    std::vector<std::pair<double, double>> meals;      // (minute of day, g)
    std::vector<ExerciseSpec> sessions;                // hour jittered
    double sleep_onset_h;                              // possibly > 24 (next day)
    double sleep_hours;
};

} // namespace

PatientRecord simulate_patient(const PatientParams& params,
                               const Scenario& scenario, std::uint64_t seed,
                               const std::string& patient_id) {
    params.validate();
    scenario.validate();

    Rng plan_rng(Rng::derive(seed, {1}));
    Rng cgm_rng(Rng::derive(seed, {2}));
    Rng hr_rng(Rng::derive(seed, {3}));
    Rng gap_rng(Rng::derive(seed, {4}));

    const int days = scenario.days;
    const std::int64_t total_min = static_cast<std::int64_t>(days) * 1440;

    // Per-day realized plan. Draw order is fixed so results are stable.
    std::vector<DayPlan> plans(days);
    for (int d = 0; d < days; ++d) {
        DayPlan& pl = plans[d];
        for (const MealSpec& m : scenario.meals) {
            const double t_min =
                m.hour * 60.0 +
                plan_rng.normal(0.0, scenario.jitter.meal_time_sd_min);
            const double g =
                m.carbs_g * std::max(0.2, 1.0 + plan_rng.normal(0.0, scenario.jitter.carb_frac_sd));
            pl.meals.emplace_back(std::clamp(t_min, 0.0, 1439.0), g);
        }
        std::sort(pl.meals.begin(), pl.meals.end());
        for (const ExerciseSpec& e : scenario.exercise_sessions) {
            ExerciseSpec r = e;
            r.hour += plan_rng.normal(0.0, scenario.jitter.exercise_time_sd_min) / 60.0;
            r.hour = std::clamp(r.hour, 0.0, 23.5);
            r.intensity = std::clamp(
                e.intensity + plan_rng.normal(0.0, scenario.jitter.intensity_sd), 0.05, 1.0);
            pl.sessions.push_back(r);
        }
        pl.sleep_onset_h = scenario.sleep_start_h + plan_rng.normal(0.0, 0.4);
        double span = scenario.sleep_end_h - scenario.sleep_start_h;
        if (span <= 0.0) span += 24.0;
        pl.sleep_hours =
            std::max(4.0, span + plan_rng.normal(0.0, scenario.jitter.sleep_sd_h));
    }

    // Minute-resolution input tracks.
    std::vector<double> carbs_at(total_min, 0.0);       // impulse grams
    std::vector<double> bolus_queue(total_min, 0.0);    // U delivered that minute
    std::vector<double> intensity(total_min, 0.0);
    std::vector<std::uint8_t> asleep(total_min, 0);
    std::vector<double> resistance_of_day(days, 1.0);

    for (int d = 0; d < days; ++d) {
        const std::int64_t base = static_cast<std::int64_t>(d) * 1440;
        for (const auto& [t_min, g] : plans[d].meals) {
            carbs_at[base + static_cast<std::int64_t>(t_min)] += g;
        }
        for (const ExerciseSpec& s : plans[d].sessions) {
            const std::int64_t m0 = base + static_cast<std::int64_t>(s.hour * 60.0);
            for (std::int64_t m = m0;
                 m < std::min<std::int64_t>(total_min, m0 + static_cast<std::int64_t>(s.duration_min));
                 ++m) {
                intensity[m] = std::max(intensity[m], s.intensity);
            }
        }
        const std::int64_t sleep_start =
            base + static_cast<std::int64_t>(plans[d].sleep_onset_h * 60.0);
        const std::int64_t sleep_end =
            sleep_start + static_cast<std::int64_t>(plans[d].sleep_hours * 60.0);
        for (std::int64_t m = sleep_start; m < std::min(sleep_end, total_min); ++m) {
            if (m >= 0) asleep[m] = 1;
        }
        // Lack of sleep raises next-day insulin resistance multiplicatively.
        if (d + 1 < days) {
            const double deficit = std::max(0.0, 7.0 - plans[d].sleep_hours);
            resistance_of_day[d + 1] =
                std::pow(1.0 + params.sleep_deficit_resistance, deficit);
        }
    }

    // Integrate at 60 s; record plasma glucose per minute.
    std::vector<double> plasma(total_min + 1, 0.0);
    SimState state = SimState::equilibrium(params);
    plasma[0] = state.G;

    EventSeries boluses;
    boluses.variable = VariableId::insulin_bolus;
    EventSeries meals_ev;
    meals_ev.variable = VariableId::carbs;

    const double basal_u_per_min = scenario.basal_rate_u_per_h / 60.0;
    for (std::int64_t m = 0; m < total_min; ++m) {
        const int day = static_cast<int>(m / 1440);
        const double hour = static_cast<double>(m % 1440) / 60.0;

        // Meal bolus per policy, computed off plasma glucose at dose time.
        if (carbs_at[m] > 0.0) {
            meals_ev.events.push_back(
                {kEpochStart + m * 60, carbs_at[m]});
            double dose = carbs_at[m] / scenario.bolus.carb_ratio_g_per_u;
            dose += std::max(0.0, (state.G - scenario.bolus.target_mg_dl) /
                                      scenario.bolus.correction_mg_dl_per_u);
            dose = std::round(dose * 10.0) / 10.0;
            if (dose > 0.0) {
                bolus_queue[m] += dose;
                boluses.events.push_back({kEpochStart + m * 60, dose});
            }
        }

        SimInputs in;
        in.insulin_u_per_min = basal_u_per_min + bolus_queue[m];  // dose over 1 min
        in.carbs_impulse_g = carbs_at[m];
        in.exercise_intensity = intensity[m];
        in.dawn_mg_dl_per_min = dawn_rate(params, hour);

        SimState s = state;
        s.Q1 += in.carbs_impulse_g;
        s = rk4(s, params, in, static_cast<double>(kOdeDtS) / 60.0,
                resistance_of_day[day]);
        state = clamp_state(s);
        plasma[m + 1] = state.G;
    }

    // CGM channel: delayed, noisy, with injected gap runs.
    const std::size_t n_slots = static_cast<std::size_t>(days) * 288;
    UniformSeries glucose;
    glucose.variable = VariableId::glucose;
    glucose.start = kEpochStart;
    glucose.step_s = kStepS;
    glucose.values.resize(n_slots);
    const std::int64_t delay_min = static_cast<std::int64_t>(params.cgm_delay_min);
    for (std::size_t k = 0; k < n_slots; ++k) {
        const std::int64_t m = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(k) * 5 - delay_min);
        glucose.values[k] = plasma[m] + cgm_rng.normal(0.0, params.cgm_noise_sd);
    }
    if (scenario.gap_rate_per_day > 0.0) {
        const double block_days = 1.0 / scenario.gap_rate_per_day;
        const std::int64_t block_slots =
            std::max<std::int64_t>(1, static_cast<std::int64_t>(block_days * 288.0));
        for (std::int64_t b0 = 0; b0 < static_cast<std::int64_t>(n_slots); b0 += block_slots) {
            const std::int64_t bn = std::min<std::int64_t>(block_slots,
                                                           n_slots - b0);
            const double gap_min = gap_rng.uniform(scenario.gap_min_minutes,
                                                   scenario.gap_max_minutes);
            const std::int64_t gap_slots =
                std::max<std::int64_t>(1, static_cast<std::int64_t>(gap_min / 5.0));
            if (gap_slots >= bn) continue;
            const std::int64_t at =
                b0 + static_cast<std::int64_t>(gap_rng.uniform_int(
                         static_cast<std::uint64_t>(bn - gap_slots)));
            for (std::int64_t k = at; k < at + gap_slots; ++k) {
                glucose.values[static_cast<std::size_t>(k)] = kGap;
            }
        }
    }

    // Smartband channels.
    UniformSeries ex, hr, sleep, schedule;
    for (UniformSeries* s : {&ex, &hr, &sleep, &schedule}) {
        s->start = kEpochStart;
        s->step_s = kStepS;
        s->values.resize(n_slots);
    }
    ex.variable = VariableId::exercise;
    hr.variable = VariableId::heart_rate;
    sleep.variable = VariableId::sleep;
    schedule.variable = VariableId::schedule;
    for (std::size_t k = 0; k < n_slots; ++k) {
        const std::int64_t m = static_cast<std::int64_t>(k) * 5;
        const double hour = static_cast<double>(m % 1440) / 60.0;
        ex.values[k] = intensity[m];
        const double ripple =
            4.0 * std::sin(2.0 * std::numbers::pi * (hour - 16.0) / 24.0);
        hr.values[k] = 60.0 + 55.0 * intensity[m] + ripple + hr_rng.normal(0.0, 2.0);
        sleep.values[k] = asleep[m] ? 1.0 : 0.0;
        schedule.values[k] = hour;
    }

    PatientRecord record;
    record.patient_id = patient_id;
    record.span_start = kEpochStart;
    record.span_end = kEpochStart + total_min * 60;
    record.series[VariableId::glucose] = std::move(glucose);
    record.series[VariableId::insulin_bolus] = std::move(boluses);
    record.series[VariableId::carbs] = std::move(meals_ev);
    record.series[VariableId::exercise] = std::move(ex);
    record.series[VariableId::heart_rate] = std::move(hr);
    record.series[VariableId::sleep] = std::move(sleep);
    record.series[VariableId::schedule] = std::move(schedule);
    if (scenario.basal_rate_u_per_h > 0.0) {
        UniformSeries basal;
        basal.variable = VariableId::insulin_basal;
        basal.start = kEpochStart;
        basal.step_s = kStepS;
        basal.values.assign(n_slots, scenario.basal_rate_u_per_h);
        record.series[VariableId::insulin_basal] = std::move(basal);
    }
    return record;
}

std::vector<PatientParams> default_cohort(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("default_cohort: n >= 1");
    std::vector<PatientParams> cohort;
    cohort.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rng rng(Rng::derive(seed, {0xc07052ULL, static_cast<std::uint64_t>(i)}));
        PatientParams p;
        p.Gb = rng.uniform(90.0, 140.0);
        p.Ib = rng.uniform(8.0, 14.0);
        p.p1 = rng.uniform(0.02, 0.04);
        p.p2 = rng.uniform(0.02, 0.035);
        p.p3 = rng.uniform(1.0e-5, 1.8e-5);
        p.n_clr = rng.uniform(0.10, 0.16);
        p.V_g = rng.uniform(95.0, 125.0);
        p.V_i = rng.uniform(10.0, 14.0);
        p.t_max_meal = rng.uniform(32.0, 48.0);
        p.A_g = rng.uniform(0.72, 0.88);
        p.cgm_noise_sd = rng.uniform(4.0, 6.0);
        p.cgm_delay_min = 10.0;
        p.dawn_amp = rng.uniform(5.0, 20.0);
        p.sleep_deficit_resistance = 0.03;
        cohort.push_back(p);
    }
    return cohort;
}

} // namespace glycast
