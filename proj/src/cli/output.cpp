#include "unravel/cli/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unravel::cli {

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<Column> columns) : columns_(std::move(columns))
{
    if (columns_.empty()) throw std::invalid_argument("CSV table needs at least one column");
}

void CsvTable::add_row(const std::vector<double>& values)
{
    if (values.size() != columns_.size()) {
        throw std::invalid_argument("CSV row has " + std::to_string(values.size()) + " values for " +
                                    std::to_string(columns_.size()) + " columns");
    }
    rows_.push_back(values);
}

std::string CsvTable::str() const
{
    std::string out = "# ";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out += ", ";
        out += columns_[c].name;
        out += " [" + (columns_[c].unit.empty() ? std::string("1") : columns_[c].unit) + "]";
    }
    out += '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out += ',';
        out += columns_[c].name;
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << str();
    if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) row.push_back(std::strtod(field.c_str(), nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace unravel::cli
