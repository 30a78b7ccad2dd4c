#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace gridwave::csv {

/// Parsed data rows of a CSV file. Lines starting with '#' and blank lines
/// are skipped; `line` keeps the 1-based position in the original file for
/// error reporting.
struct Row {
    int line = 0;
    std::vector<std::string> fields;
};

std::vector<Row> read_file(const std::filesystem::path& path);

/// Deterministic writer: fixed formatting, '\n' endings, no locale.
class Writer {
  public:
    explicit Writer(const std::filesystem::path& path);
    void comment(const std::string& text);
    void raw(const std::string& line);
    Writer& field(const std::string& s);
    Writer& field(double v);
    Writer& field(int v);
    void end_row();
    void close();

  private:
    std::ofstream out_;
    bool row_open_ = false;
};

/// Shortest round-trip representation of a double (repeatable across runs).
std::string format_double(double v);

}  // namespace gridwave::csv
