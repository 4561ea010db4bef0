#include "storeval/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace storeval {

std::string format_double(double v, int sig) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
    std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
}

void CsvWriter::comment(std::string_view text) { out_ << "# " << text << "\n"; }

void CsvWriter::row(std::string_view line) { out_ << line << "\n"; }

CsvWriter::~CsvWriter() {
    out_.flush();
}

std::size_t CsvFile::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::runtime_error("csv: missing column " + std::string(name));
}

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    CsvFile file;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (;;) {
            const std::size_t pos = s.find(',', start);
            if (pos == std::string::npos) {
                parts.push_back(s.substr(start));
                return parts;
            }
            parts.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
    };
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t s = 1;
            if (s < line.size() && line[s] == ' ') ++s;
            file.comments.push_back(line.substr(s));
            continue;
        }
        if (!have_header) {
            file.columns = split(line);
            have_header = true;
        } else {
            file.rows.push_back(split(line));
        }
    }
    return file;
}

}  // namespace storeval
