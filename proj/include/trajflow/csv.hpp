#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trajflow {

// Shortest decimal form that parses back to the same double ("1.5", "0.1",
// "1e+300"). Keeps CSV outputs byte-stable across runs.
std::string format_double(double v);

// Strict double parse of a full field; throws DataError mentioning the
// 1-based line number on garbage, empty fields or non-finite values.
double parse_double_field(const std::string& field, std::size_t line_no);

std::vector<std::string> split_csv_line(const std::string& line);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace trajflow
