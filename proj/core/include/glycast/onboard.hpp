#ifndef GLYCAST_ONBOARD_HPP
#define GLYCAST_ONBOARD_HPP

#include "glycast/series.hpp"

namespace glycast {

/// Decay kernel for remnant (on-board) effects. The remaining fraction r
/// starts at 1, reaches 0 at duration_s and never increases; the activity
/// a = -dr/dtau integrates to 1 over [0, duration_s].
struct Kernel {
    enum class Shape { bi_exponential, linear_decay };

    Shape shape = Shape::bi_exponential;
    double duration_s = 5.0 * 3600.0;
    double peak_s = 75.0 * 60.0;  // bi_exponential only

    void validate() const;

    static Kernel insulin_default();   // bi-exponential, 5 h, peak 75 min
    static Kernel carbs_default();     // bi-exponential, 3 h, peak 45 min
    static Kernel exercise_default();  // linear decay, 8 h
};

/// Fraction of an event still unabsorbed age_s seconds after it.
/// Throws std::invalid_argument for negative age.
double remaining_fraction(const Kernel& kernel, double age_s);

/// Instantaneous activity a(age) in 1/s; -d(remaining_fraction)/d(age).
double activity_fraction(const Kernel& kernel, double age_s);

/// OB(t) = sum_i d_i * r(t - t_i) over events at or before t, evaluated on
/// every grid slot. Result units are the event units (U, g, intensity*min).
UniformSeries onboard(const EventSeries& events, const Kernel& kernel,
                      const GridSpec& grid);

/// A(t) = sum_i d_i * a(t - t_i), in event units per second.
UniformSeries activity(const EventSeries& events, const Kernel& kernel,
                       const GridSpec& grid);

} // namespace glycast

#endif
