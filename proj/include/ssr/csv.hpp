#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssr::csv {

/// Formats with 10 significant digits, '.' decimal separator, no locale.
std::string format(double x);

double to_double(const std::string& field);

/// Reads all rows, splitting on commas. No quoting support; the files this
/// library writes never need it.
std::vector<std::vector<std::string>> read(std::istream& in);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ssr::csv
