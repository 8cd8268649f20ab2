#include "trafficpinn/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "trafficpinn/errors.hpp"

namespace tpinn::csv {

std::string format(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw DataError("cannot format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw DataError(std::string(what) + ": not a number: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {
std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}
} // namespace

Table read(std::istream& in, const std::string& source_name) {
    Table table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        auto fields = split(view);
        if (!have_header) {
            for (auto f : fields) table.header.emplace_back(trim(f));
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw DataError(source_name + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(table.header.size()) + " columns, found " + std::to_string(fields.size()));
        std::vector<std::string> row;
        row.reserve(fields.size());
        for (auto f : fields) row.emplace_back(trim(f));
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(lineno);
    }
    if (!have_header) throw DataError(source_name + ": missing header line");
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    return read(in, path);
}

} // namespace tpinn::csv
