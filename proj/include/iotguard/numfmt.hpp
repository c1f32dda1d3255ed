#pragma once

#include <string>

namespace iotguard {

// Shortest decimal representation that round-trips, rendered with the same
// conventions Python's repr uses: fixed notation for exponents in [-4, 16),
// otherwise scientific with a sign and at least two exponent digits, and a
// trailing ".0" on integral values. Keeps prompt and report text stable.
std::string format_double(double v);

// Round-trippable compact form for CSV/JSON-adjacent text output.
std::string format_csv(double v);

}  // namespace iotguard
