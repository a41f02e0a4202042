#include "xspec/labels.hpp"

#include <string>

#include "xspec/error.hpp"

namespace xspec {

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::visible: return "visible";
        case Modality::polarimetric: return "polarimetric";
        case Modality::thermal_s0: return "thermal_s0";
    }
    return "?";
}

std::string_view to_string(Condition c) {
    return c == Condition::baseline ? "baseline" : "expression";
}

std::string_view to_string(RangeId r) {
    switch (r) {
        case RangeId::R1: return "R1";
        case RangeId::R2: return "R2";
        case RangeId::R3: return "R3";
    }
    return "?";
}

Modality parse_modality(std::string_view s) {
    if (s == "visible") return Modality::visible;
    if (s == "polarimetric") return Modality::polarimetric;
    if (s == "thermal_s0") return Modality::thermal_s0;
    fail(ErrorKind::format, "unknown modality '" + std::string(s) + "'");
}

Condition parse_condition(std::string_view s) {
    if (s == "baseline") return Condition::baseline;
    if (s == "expression") return Condition::expression;
    fail(ErrorKind::format, "unknown condition '" + std::string(s) + "'");
}

RangeId parse_range(std::string_view s) {
    if (s == "R1") return RangeId::R1;
    if (s == "R2") return RangeId::R2;
    if (s == "R3") return RangeId::R3;
    fail(ErrorKind::format, "unknown range '" + std::string(s) + "'");
}

}  // namespace xspec
