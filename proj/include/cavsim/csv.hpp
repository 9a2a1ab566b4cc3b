#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cavsim {

/// CSV files start with `# cavsim v<version>`, then the header row; floats
/// are written with round-trip precision so files parse back losslessly.
class CsvWriter {
  public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);

  private:
    std::ostream& out_;
    std::size_t n_cols_;
};

std::string format_double(double v);  ///< shortest round-trip decimal

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t col_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows);

/// FNV-1a 64-bit digest, used for the manifest file inventory.
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace cavsim
