#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace storeval {

/// Shortest decimal with `sig` significant digits. sig=17 round-trips doubles.
std::string format_double(double v, int sig = 12);

/// Line-oriented CSV writer. Comment lines start with '#' and precede the
/// header row; fields are comma separated with no quoting (fields produced
/// by this project never contain commas).
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void comment(std::string_view text);
    void row(std::string_view line);
    ~CsvWriter();

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

struct CsvFile {
    std::vector<std::string> comments;               // without leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;  // throws if absent
};

CsvFile read_csv(const std::filesystem::path& path);

}  // namespace storeval
