#pragma once

#include <string>

namespace beatfuse {

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

// Hexfloat representation; bit-exact through parse_hex_double.
std::string format_hex_double(double v);
double parse_hex_double(const std::string& s);

// Parse a decimal field, multiplying by 10^decimal_shift. The shift is
// applied to the decimal exponent of the text before conversion, so a
// value written with the inverse shift reparses to the identical double
// (no double-rounding through the scale factor).
double parse_scaled(const std::string& text, int decimal_shift, bool* ok);

// Format v * 10^decimal_shift exactly in decimal, by shifting the
// exponent of v's shortest representation.
std::string format_scaled(double v, int decimal_shift);

}  // namespace beatfuse
