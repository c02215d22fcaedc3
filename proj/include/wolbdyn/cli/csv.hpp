#pragma once

// Locale-independent CSV emission: '.' decimal point, 17 significant
// digits, '\n' line endings, '#'-prefixed metadata lines.

#include <span>
#include <string>
#include <vector>

namespace wolbdyn::cli {

inline constexpr const char* kVersion = "0.1.0";

std::string format_double(double v);

// "# wolbdyn <version>\n"
std::string version_line();

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);

    void row(std::span<const double> values);
    void row(const std::vector<std::string>& cells);
    void meta(const std::string& key, const std::string& value);

    const std::string& str() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

struct CsvDocument {
    std::vector<std::string> meta;  // comment lines without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Minimal reader for the files produced above (no quoting).
CsvDocument parse_csv(const std::string& text);

}  // namespace wolbdyn::cli
