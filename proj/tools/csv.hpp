#pragma once

#include <string>
#include <vector>

namespace shortrate::cli {

/// Numeric table with named columns.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // throws InvalidInput when absent
    std::vector<double> values(const std::string& name) const;
};

/// Header row, ',' separator, '.' decimals, LF endings, 17 significant digits.
std::string format_csv(const Table& table);
void write_csv(const std::string& path, const Table& table);

Table parse_csv(const std::string& text, const std::string& origin = "csv");
Table read_csv(const std::string& path);

}  // namespace shortrate::cli
