#pragma once

#include <string>
#include <vector>

namespace ctmck {

// %.{digits}g formatting; digits=17 round-trips any double.
std::string format_sig(double v, int significant_digits);

// RFC 4180 field quoting: wraps fields containing commas, quotes, or
// newlines and doubles embedded quotes.
std::string csv_field(const std::string& raw);

std::string csv_row(const std::vector<std::string>& fields);

}  // namespace ctmck
