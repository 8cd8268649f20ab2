#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tpinn::csv {

// Shortest round-trip representation, locale independent.
std::string format(double v);

// Strict full-string parse; throws DataError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line for each row
};

// Reads a comma-separated file with a header line. Blank lines are skipped.
Table read(std::istream& in, const std::string& source_name);
Table read_file(const std::string& path);

} // namespace tpinn::csv
