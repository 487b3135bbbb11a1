#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pinnmpc {

/// Shortest round-trip decimal for a double (17 significant digits).
std::string fmt_g17(double v);

std::uint64_t fnv1a64(const std::string& text);

/// Minimal CSV writer: '#' comment lines, one header line, numeric rows
/// rendered with fmt_g17. Deterministic byte output.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void comment(const std::string& line);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& cells);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace pinnmpc
