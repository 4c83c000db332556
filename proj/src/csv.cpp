#include "dro/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dro {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::string escape_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_line(std::ofstream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << escape_cell(cells[i]);
    }
    out << '\n';
}

} // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF on every platform
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    write_line(out, header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: ragged row writing " + path);
        write_line(out, row);
    }
    if (!out) throw std::runtime_error("write_csv: write failure on " + path);
}

void write_csv_numeric(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> r;
        r.reserve(row.size());
        for (double v : row) r.push_back(format_value(v));
        cells.push_back(std::move(r));
    }
    write_csv(path, header, cells);
}

} // namespace dro
