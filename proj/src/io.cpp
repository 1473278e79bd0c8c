#include "beamlab/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace beamlab {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 16);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i ? "," : "") << header[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw std::logic_error("column count mismatch in " + path_);
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line += ',';
        line += format_number(values[i]);
    }
    line += '\n';
    out_ << line;
}

void write_columns(const std::string& path, const std::vector<std::string>& header,
                   const std::vector<const std::vector<double>*>& columns) {
    if (header.size() != columns.size()) throw std::logic_error("header/column mismatch");
    CsvWriter w(path, header);
    const std::size_t n = columns.empty() ? 0 : columns.front()->size();
    for (const auto* c : columns) {
        if (c->size() != n) throw std::logic_error("columns of unequal length for " + path);
    }
    std::vector<double> buf(columns.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) buf[j] = (*columns[j])[i];
        w.row(buf);
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::runtime_error("missing CSV column " + name);
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
}

static double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("unparseable CSV number '" + s + "'");
    }
    return v;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> r;
        while (std::getline(ss, cell, ',')) r.push_back(parse_double(cell));
        if (r.size() != t.header.size()) throw std::runtime_error("ragged CSV row in " + path);
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace beamlab
