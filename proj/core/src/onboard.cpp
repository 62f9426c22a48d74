#include "glycast/onboard.hpp"

#include <cmath>
#include <stdexcept>

namespace glycast {

void Kernel::validate() const {
    if (duration_s <= 0.0) throw std::invalid_argument("kernel: duration must be positive");
    if (shape == Shape::bi_exponential &&
        !(peak_s > 0.0 && peak_s < duration_s)) {
        throw std::invalid_argument("kernel: need 0 < peak < duration");
    }
}

Kernel Kernel::insulin_default() {
    return {Shape::bi_exponential, 5.0 * 3600.0, 75.0 * 60.0};
}
Kernel Kernel::carbs_default() {
    return {Shape::bi_exponential, 3.0 * 3600.0, 45.0 * 60.0};
}
Kernel Kernel::exercise_default() {
    return {Shape::linear_decay, 8.0 * 3600.0, 0.0};
}

namespace {

// Activity tau*exp(-tau/tp), truncated to [0, D] and renormalized. tp equals
// the peak time since d/dtau[tau e^(-tau/tp)] vanishes at tau = tp.
// Normalizer Z = integral_0^D tau e^(-tau/tp) dtau
//             = tp^2 - tp (D + tp) e^(-D/tp).
double bi_exp_norm(const Kernel& k) {
    const double tp = k.peak_s;
    const double D = k.duration_s;
    return tp * tp - tp * (D + tp) * std::exp(-D / tp);
}

} // namespace

double remaining_fraction(const Kernel& kernel, double age_s) {
    kernel.validate();
    if (age_s < 0.0) throw std::invalid_argument("remaining_fraction: negative age");
    if (age_s >= kernel.duration_s) return 0.0;

    if (kernel.shape == Kernel::Shape::linear_decay) {
        return 1.0 - age_s / kernel.duration_s;
    }
    const double tp = kernel.peak_s;
    const double absorbed =
        (tp * tp - tp * (age_s + tp) * std::exp(-age_s / tp)) / bi_exp_norm(kernel);
    const double r = 1.0 - absorbed;
    return r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
}

double activity_fraction(const Kernel& kernel, double age_s) {
    kernel.validate();
    if (age_s < 0.0) throw std::invalid_argument("activity_fraction: negative age");
    if (age_s >= kernel.duration_s) return 0.0;

    if (kernel.shape == Kernel::Shape::linear_decay) {
        return 1.0 / kernel.duration_s;
    }
    const double tp = kernel.peak_s;
    return age_s * std::exp(-age_s / tp) / bi_exp_norm(kernel);
}

namespace {

using PointFn = double (*)(const Kernel&, double);

UniformSeries accumulate(const EventSeries& events, const Kernel& kernel,
                         const GridSpec& grid, PointFn fn, VariableId out_var) {
    kernel.validate();
    events.validate();

    UniformSeries out;
    out.variable = out_var;
    out.start = grid.start;
    out.step_s = grid.step_s;
    out.values.assign(grid.n, 0.0);

    // Events are time-ordered, so for slot t only events in a trailing
    // window of length duration contribute. Extended-precision accumulation
    // keeps superposition exact to ~1e-13 regardless of event grouping.
    std::size_t first = 0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double t = static_cast<double>(grid.time_at(i).sec);
        while (first < events.events.size() &&
               t - static_cast<double>(events.events[first].time.sec) >=
                   kernel.duration_s) {
            ++first;
        }
        long double acc = 0.0L;
        for (std::size_t e = first; e < events.events.size(); ++e) {
            const double age = t - static_cast<double>(events.events[e].time.sec);
            if (age < 0.0) break;
            acc += static_cast<long double>(events.events[e].value) *
                   static_cast<long double>(fn(kernel, age));
        }
        out.values[i] = static_cast<double>(acc);
    }
    return out;
}

} // namespace

UniformSeries onboard(const EventSeries& events, const Kernel& kernel,
                      const GridSpec& grid) {
    VariableId out_var = VariableId::iob;
    if (events.variable == VariableId::carbs) out_var = VariableId::cob;
    if (events.variable == VariableId::exercise) out_var = VariableId::eob;
    return accumulate(events, kernel, grid, &remaining_fraction, out_var);
}

UniformSeries activity(const EventSeries& events, const Kernel& kernel,
                       const GridSpec& grid) {
    return accumulate(events, kernel, grid, &activity_fraction, events.variable);
}

} // namespace glycast
