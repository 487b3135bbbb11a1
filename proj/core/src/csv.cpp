#include "pinnmpc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pinnmpc {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary);
    if (!impl_->out) throw std::runtime_error("CsvWriter: cannot open " + path);
}

CsvWriter::~CsvWriter() {
    close();
    delete impl_;
}

void CsvWriter::comment(const std::string& line) { impl_->out << "# " << line << "\n"; }

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        impl_->out << columns[i] << (i + 1 < columns.size() ? "," : "");
    impl_->out << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->out << fmt_g17(values[i]) << (i + 1 < values.size() ? "," : "");
    impl_->out << "\n";
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
        impl_->out << cells[i] << (i + 1 < cells.size() ? "," : "");
    impl_->out << "\n";
}

void CsvWriter::close() {
    if (impl_->out.is_open()) impl_->out.close();
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (!header_seen) {
            while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(table.columns.size());
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != table.columns.size())
            throw std::runtime_error("read_csv: ragged row in " + path);
        table.rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::runtime_error("read_csv: no header in " + path);
    return table;
}

}  // namespace pinnmpc
