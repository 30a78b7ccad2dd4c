#include "gridwave/csv.hpp"

#include <charconv>
#include <cstdio>

#include "gridwave/errors.hpp"

namespace gridwave::csv {

std::vector<Row> read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path.string());

    std::vector<Row> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        Row row;
        row.line = lineno;
        std::size_t pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            std::string field = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            // trim
            std::size_t b = field.find_first_not_of(" \t");
            std::size_t e = field.find_last_not_of(" \t");
            row.fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
}

void Writer::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void Writer::raw(const std::string& line) { out_ << line << "\n"; }

Writer& Writer::field(const std::string& s) {
    if (row_open_) out_ << ",";
    out_ << s;
    row_open_ = true;
    return *this;
}

Writer& Writer::field(double v) { return field(format_double(v)); }

Writer& Writer::field(int v) { return field(std::to_string(v)); }

void Writer::end_row() {
    out_ << "\n";
    row_open_ = false;
}

void Writer::close() {
    out_.flush();
    out_.close();
}

std::string format_double(double v) {
    char buf[48];
    // round-trippable and compact; %.17g only where needed
    for (int prec : {15, 16, 17}) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

}  // namespace gridwave::csv
