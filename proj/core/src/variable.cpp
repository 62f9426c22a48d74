#include "glycast/variable.hpp"

namespace glycast {

std::string_view to_string(VariableId v) {
    switch (v) {
        case VariableId::glucose: return "glucose";
        case VariableId::insulin_bolus: return "insulin_bolus";
        case VariableId::insulin_basal: return "insulin_basal";
        case VariableId::carbs: return "carbs";
        case VariableId::exercise: return "exercise";
        case VariableId::heart_rate: return "heart_rate";
        case VariableId::sleep: return "sleep";
        case VariableId::schedule: return "schedule";
        case VariableId::iob: return "iob";
        case VariableId::cob: return "cob";
        case VariableId::eob: return "eob";
    }
    return "?";
}

std::string_view canonical_unit(VariableId v) {
    switch (v) {
        case VariableId::glucose: return "mg/dL";
        case VariableId::insulin_bolus: return "U";
        case VariableId::insulin_basal: return "U/h";
        case VariableId::carbs: return "g";
        case VariableId::exercise: return "intensity";
        case VariableId::heart_rate: return "bpm";
        case VariableId::sleep: return "flag";
        case VariableId::schedule: return "h";
        case VariableId::iob: return "U";
        case VariableId::cob: return "g";
        case VariableId::eob: return "intensity*min";
    }
    return "?";
}

std::optional<VariableId> parse_variable(std::string_view name) {
    for (VariableId v : kAllVariables) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

} // namespace glycast
