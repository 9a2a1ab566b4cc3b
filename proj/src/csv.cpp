#include "cavsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cavsim/errors.hpp"
#include "cavsim/version.hpp"

namespace cavsim {

std::string format_double(double v) {
    char buf[40];
    // round-trip precision; files parse back losslessly
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& columns)
    : out_(out), n_cols_(columns.size()) {
    out_ << "# cavsim v" << kVersion << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw IoError("csv: row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

std::size_t CsvTable::col_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw IoError("csv: no column '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const std::size_t idx = col_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string field;
        if (!header_done) {
            while (std::getline(ls, field, ',')) table.columns.push_back(field);
            header_done = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ls, field, ',')) {
            try {
                row.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw IoError("csv: non-numeric field '" + field + "'");
            }
        }
        if (row.size() != table.columns.size())
            throw IoError("csv: ragged row");
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("csv: cannot open '" + path + "'");
    return read_csv(f);
}

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    if (!f) throw IoError("csv: cannot open '" + path + "' for writing");
    CsvWriter w(f, columns);
    for (const auto& r : rows) w.row(r);
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("checksum: cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<std::uint8_t>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!f) break;
    }
    return h;
}

}  // namespace cavsim
