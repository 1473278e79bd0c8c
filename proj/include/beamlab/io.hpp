#pragma once

#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace beamlab {

// 16 significant digits, '.' decimal separator, independent of the locale.
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ofstream out_;
    std::string path_;
    std::size_t columns_;
};

// Writes equally long columns under the given header.
void write_columns(const std::string& path, const std::vector<std::string>& header,
                   const std::vector<const std::vector<double>*>& columns);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace beamlab
