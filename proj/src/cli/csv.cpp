#include "wolbdyn/cli/csv.hpp"

#include "wolbdyn/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace wolbdyn::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string version_line() { return std::string("# wolbdyn ") + kVersion + "\n"; }

CsvWriter::CsvWriter(std::vector<std::string> columns) : width_(columns.size()), text_(version_line()) {
    row(columns);
}

void CsvWriter::row(std::span<const double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InternalConsistencyError("csv row width mismatch");
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) text_ += ',';
        text_ += cells[k];
    }
    text_ += '\n';
}

void CsvWriter::meta(const std::string& key, const std::string& value) {
    text_ += "# " + key + "=" + value + "\n";
}

CsvDocument parse_csv(const std::string& text) {
    CsvDocument doc;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            doc.meta.push_back(line.size() > 2 ? line.substr(2) : std::string());
            continue;
        }
        if (!have_header) {
            doc.header = split(line);
            have_header = true;
        } else {
            doc.rows.push_back(split(line));
        }
    }
    return doc;
}

}  // namespace wolbdyn::cli
