#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace unravel::cli {

/// printf("%.17g"): enough digits for an exact round trip through strtod.
std::string format_double(double x);

/// Column name plus a unit (empty for dimensionless quantities).
struct Column {
    std::string name;
    std::string unit;
};

/// Comma-separated table. The first line is a `#` comment naming every column
/// with its unit in brackets, the second the bare column names.
class CsvTable {
public:
    explicit CsvTable(std::vector<Column> columns);

    void add_row(const std::vector<double>& values);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<Column>& columns() const { return columns_; }

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Reads back a table written by CsvTable (comment and header lines skipped).
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace unravel::cli
