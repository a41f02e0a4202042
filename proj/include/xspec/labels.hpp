#pragma once

#include <string_view>

namespace xspec {

enum class Modality { visible, polarimetric, thermal_s0 };
enum class Condition { baseline, expression };
enum class RangeId { R1, R2, R3 };

std::string_view to_string(Modality m);
std::string_view to_string(Condition c);
std::string_view to_string(RangeId r);

Modality parse_modality(std::string_view s);
Condition parse_condition(std::string_view s);
RangeId parse_range(std::string_view s);

inline constexpr RangeId kAllRanges[] = {RangeId::R1, RangeId::R2, RangeId::R3};

}  // namespace xspec
