#ifndef GLYCAST_VARIABLE_HPP
#define GLYCAST_VARIABLE_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace glycast {

/// Closed enumeration of monitored signals. The trailing block are derived
/// on-board pseudo-variables, produced by the onboard transform rather than
/// monitored directly; is_derived() tells them apart.
enum class VariableId {
    glucose,        // mg/dL
    insulin_bolus,  // U (discrete doses)
    insulin_basal,  // U/h (infusion rate)
    carbs,          // g
    exercise,       // intensity in [0,1]
    heart_rate,     // bpm
    sleep,          // {0,1}
    schedule,       // hour of day in [0,24)
    // -- derived (on-board remnant features) --
    iob,            // insulin on board, U
    cob,            // carbs on board, g
    eob,            // exercise on board, intensity*min
};

constexpr std::array<VariableId, 11> kAllVariables = {
    VariableId::glucose,   VariableId::insulin_bolus, VariableId::insulin_basal,
    VariableId::carbs,     VariableId::exercise,      VariableId::heart_rate,
    VariableId::sleep,     VariableId::schedule,      VariableId::iob,
    VariableId::cob,       VariableId::eob,
};

constexpr bool is_derived(VariableId v) {
    return v == VariableId::iob || v == VariableId::cob || v == VariableId::eob;
}

/// Variables whose samples are accumulated doses: resampled by sum.
constexpr bool is_dose_like(VariableId v) {
    return v == VariableId::insulin_bolus || v == VariableId::carbs;
}

/// Variables holding a piecewise-constant state: resampled by last value.
constexpr bool is_state_like(VariableId v) {
    return v == VariableId::sleep || v == VariableId::schedule;
}

/// Everything else is a level resampled by mean.
constexpr bool is_level_like(VariableId v) {
    return !is_dose_like(v) && !is_state_like(v);
}

std::string_view to_string(VariableId v);
std::string_view canonical_unit(VariableId v);

/// Name -> id; empty when the name is unknown.
std::optional<VariableId> parse_variable(std::string_view name);

} // namespace glycast

#endif
