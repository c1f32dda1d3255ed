#include "iotguard/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

namespace iotguard {

namespace {

// Shortest round-trip digits and the decimal exponent of the leading digit.
struct Decimal {
  std::string digits;  // no dot, no sign
  int exponent = 0;    // value = 0.digits * 10^(exponent+1)
  bool negative = false;
};

Decimal decompose(double v) {
  Decimal d;
  d.negative = std::signbit(v);
  const double mag = std::fabs(v);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), mag, std::chars_format::scientific);
  std::string s(buf, res.ptr);
  // to_chars scientific: "d[.ddd]e[+-]XX"
  const auto epos = s.find('e');
  std::string mantissa = s.substr(0, epos);
  d.exponent = std::atoi(s.c_str() + epos + 1);
  const auto dot = mantissa.find('.');
  if (dot != std::string::npos) mantissa.erase(dot, 1);
  while (mantissa.size() > 1 && mantissa.back() == '0') mantissa.pop_back();
  d.digits = mantissa;
  return d;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";

  const Decimal d = decompose(v);
  std::string out = d.negative ? "-" : "";
  const int e = d.exponent;
  const int n = static_cast<int>(d.digits.size());

  if (e >= -4 && e < 16) {
    if (e >= n - 1) {
      out += d.digits;
      out.append(static_cast<std::size_t>(e - n + 1), '0');
      out += ".0";
    } else if (e >= 0) {
      out += d.digits.substr(0, static_cast<std::size_t>(e + 1));
      out += '.';
      out += d.digits.substr(static_cast<std::size_t>(e + 1));
    } else {
      out += "0.";
      out.append(static_cast<std::size_t>(-e - 1), '0');
      out += d.digits;
    }
  } else {
    out += d.digits.substr(0, 1);
    if (n > 1) {
      out += '.';
      out += d.digits.substr(1);
    }
    out += 'e';
    out += e < 0 ? '-' : '+';
    const int mag = e < 0 ? -e : e;
    if (mag < 10) out += '0';
    out += std::to_string(mag);
  }
  return out;
}

std::string format_csv(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace iotguard
