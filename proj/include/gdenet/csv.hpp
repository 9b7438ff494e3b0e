#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gdenet::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Shortest round-trip text is not required; 17 significant digits always
/// round-trip a double and are stable byte for byte.
std::string format_double(double v);

/// Strict conversions; throw std::invalid_argument on trailing garbage.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

/// Writes through `<path>.tmp` and renames over `path`.
void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);

}  // namespace gdenet::csv
