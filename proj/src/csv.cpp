#include "trajflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "trajflow/errors.hpp"

namespace trajflow {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_field(const std::string& field, std::size_t line_no) {
    if (field.empty()) {
        throw DataError("csv: empty numeric field on line " + std::to_string(line_no));
    }
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw DataError("csv: cannot parse '" + field + "' as a number on line " +
                        std::to_string(line_no));
    }
    if (!std::isfinite(value)) {
        throw DataError("csv: non-finite value '" + field + "' on line " +
                        std::to_string(line_no));
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

}  // namespace trajflow
