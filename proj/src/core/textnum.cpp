#include "core/textnum.hpp"

#include <cassert>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace beatfuse {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_hex_double(double v) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%a", v);
  return std::string(buf, buf + n);
}

double parse_hex_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

namespace {

// Splits "mantissa[eE]exp" and returns mantissa with the exponent value;
// returns false on anything that is not a plain decimal number.
bool split_exponent(const std::string& text, std::string* mantissa, long* exponent) {
  auto epos = text.find_first_of("eE");
  if (epos == std::string::npos) {
    *mantissa = text;
    *exponent = 0;
    return true;
  }
  *mantissa = text.substr(0, epos);
  const std::string etext = text.substr(epos + 1);
  if (etext.empty()) return false;
  char* end = nullptr;
  errno = 0;
  *exponent = std::strtol(etext.c_str(), &end, 10);
  return errno == 0 && end && *end == '\0';
}

bool strict_strtod(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  *out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

}  // namespace

double parse_scaled(const std::string& text, int decimal_shift, bool* ok) {
  std::string mantissa;
  long exponent = 0;
  if (!split_exponent(text, &mantissa, &exponent)) {
    *ok = false;
    return 0.0;
  }
  if (mantissa.empty() || mantissa == "+" || mantissa == "-" ||
      mantissa.find_first_of("xXnNiIpP") != std::string::npos) {
    // reject hex floats, nan, inf in data fields
    *ok = false;
    return 0.0;
  }
  std::string rebuilt = mantissa + "e" + std::to_string(exponent + decimal_shift);
  double v = 0.0;
  if (!strict_strtod(rebuilt, &v)) {
    *ok = false;
    return 0.0;
  }
  *ok = true;
  return v;
}

std::string format_scaled(double v, int decimal_shift) {
  std::string s = format_double(v);
  std::string mantissa;
  long exponent = 0;
  bool split = split_exponent(s, &mantissa, &exponent);
  assert(split);
  (void)split;
  return mantissa + "e" + std::to_string(exponent + decimal_shift);
}

}  // namespace beatfuse
