#ifndef GLYCAST_SIMULATOR_HPP
#define GLYCAST_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "glycast/series.hpp"

namespace glycast {

/// Minimal-model physiology plus CGM realism knobs. Rates are per minute.
/// These are documented simulator defaults, not clinical claims.
struct PatientParams {
    double Gb = 110.0;        // basal glucose, mg/dL
    double Ib = 10.0;         // basal plasma insulin, mU/L
    double p1 = 0.03;         // glucose effectiveness, 1/min
    double p2 = 0.025;        // remote insulin decay, 1/min
    double p3 = 1.3e-5;       // insulin sensitivity gain, (mU/L)^-1 min^-2
    double n_clr = 0.13;      // plasma insulin clearance, 1/min
    double V_g = 110.0;       // glucose distribution volume, dL
    double V_i = 12.0;        // insulin distribution volume, L
    double t_max_meal = 40.0; // gut absorption peak, min
    double A_g = 0.8;         // carb bioavailability fraction

    double cgm_noise_sd = 5.0;    // mg/dL
    double cgm_delay_min = 10.0;  // sensor lag, min
    double dawn_amp = 15.0;       // dawn phenomenon envelope, mg/dL
    double sleep_deficit_resistance = 0.03;  // fraction per missing hour

    void validate() const;
};

struct MealSpec {
    double hour = 8.0;    // clock time of day
    double carbs_g = 60.0;
};

struct ExerciseSpec {
    double hour = 17.5;
    double duration_min = 40.0;
    double intensity = 0.5;  // [0,1]
};

/// Simple pump-style dosing: meal bolus = carbs/carb_ratio plus a correction
/// toward target when above it.
struct BolusPolicy {
    double carb_ratio_g_per_u = 10.0;
    double correction_mg_dl_per_u = 40.0;
    double target_mg_dl = 110.0;
};

/// Per-day random perturbation magnitudes.
struct JitterSpec {
    double meal_time_sd_min = 20.0;
    double carb_frac_sd = 0.15;
    double exercise_time_sd_min = 25.0;
    double intensity_sd = 0.1;
    double sleep_sd_h = 0.8;
};

struct Scenario {
    int days = 14;
    std::vector<MealSpec> meals = {{7.5, 45.0}, {13.0, 70.0}, {20.0, 80.0}};
    BolusPolicy bolus;
    /// Supplemental infusion above the Ib-maintaining nominal basal, U/h.
    /// The insulin equation is written in deviation form (it relaxes to Ib
    /// with zero input), so 0 means "nominal basal".
    double basal_rate_u_per_h = 0.0;
    std::vector<ExerciseSpec> exercise_sessions = {{17.5, 40.0, 0.5}};
    double sleep_start_h = 23.0;
    double sleep_end_h = 7.0;
    JitterSpec jitter;

    // CGM dropout: one gap of [gap_min, gap_max] minutes per 1/gap_rate days.
    double gap_rate_per_day = 0.5;
    double gap_min_minutes = 20.0;
    double gap_max_minutes = 60.0;

    void validate() const;
};

/// Instantaneous physiological state.
struct SimState {
    double G = 110.0;   // plasma glucose, mg/dL
    double X = 0.0;     // remote insulin action, 1/min
    double I = 10.0;    // plasma insulin, mU/L
    double Q1 = 0.0;    // gut compartment 1, g
    double Q2 = 0.0;    // gut compartment 2, g
    std::int64_t clamp_count = 0;  // times the 20 mg/dL floor engaged

    static SimState equilibrium(const PatientParams& p) {
        return {p.Gb, 0.0, p.Ib, 0.0, 0.0, 0};
    }
};

/// External inputs held constant across one integration step. carbs_impulse_g
/// is added to the first gut compartment at the start of the step.
/// dawn_mg_dl_per_min is the caller-evaluated circadian drive dawn(t).
struct SimInputs {
    double insulin_u_per_min = 0.0;
    double carbs_impulse_g = 0.0;
    double exercise_intensity = 0.0;
    double dawn_mg_dl_per_min = 0.0;
};

/// One RK4 step of
///   dG/dt = -p1 (G - Gb) - X G (1 + 2 intensity) + Ra/V_g + dawn(t)
///   dX/dt = -p2 X + p3 (I - Ib)
///   dI/dt = -n_clr (I - Ib) + 1000 u / V_i
///   dQ1/dt = -Q1/t_max,  dQ2/dt = (Q1 - Q2)/t_max,  Ra = A_g Q2 1000/t_max
/// with G clamped to >= 20 mg/dL (clamp_count incremented) and all
/// compartments kept non-negative. dt_s must be in (0, 60].
SimState step_ode(const SimState& state, const PatientParams& params,
                  const SimInputs& inputs, double dt_s);

/// Runs the scenario and assembles the record: glucose at 300 s with sensor
/// delay, noise and injected gaps; insulin_bolus/carbs events; exercise,
/// heart_rate, sleep and schedule channels at 300 s. Deterministic per seed.
PatientRecord simulate_patient(const PatientParams& params,
                               const Scenario& scenario, std::uint64_t seed,
                               const std::string& patient_id = "sim");

/// n parameter sets drawn uniformly within documented physiological ranges;
/// deterministic per seed.
std::vector<PatientParams> default_cohort(int n, std::uint64_t seed);

/// Dawn drive at clock hour h for the given parameters, mg/dL per minute.
/// Raised-cosine bump supported on roughly 04:00-08:00, scaled so the
/// steady-state glucose shift tops out at dawn_amp.
double dawn_rate(const PatientParams& params, double hour_of_day);

} // namespace glycast

#endif
