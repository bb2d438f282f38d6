#pragma once

#include <string>

namespace staug {

// "%.{digits}g"; empty string for NaN (the missing-cell convention).
std::string format_sig(double v, int digits = 6);

// Shortest round-trippable representation (%.17g); empty for NaN.
std::string format_exact(double v);

// Parses a CSV cell; empty or "nan" -> quiet NaN. Throws FormatError.
double parse_cell(const std::string& cell);

} // namespace staug
