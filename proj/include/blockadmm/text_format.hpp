#pragma once

#include <string>
#include <string_view>

namespace blockadmm {

/// 17 significant digits, locale independent. NaN prints as "nan".
std::string format_double(double value);

/// Parses a C-locale float ("nan", "inf" and "-inf" included). Throws IoError.
double parse_double(std::string_view text);

}  // namespace blockadmm
