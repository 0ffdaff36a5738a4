#ifndef CBO_IO_HPP
#define CBO_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

namespace cbo {

/// 17 significant digits ("%.17g"): round-trips doubles exactly.
std::string format_double(double x);

/// FNV-1a 64-bit over a string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace cbo

#endif
