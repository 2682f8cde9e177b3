#include "csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shortrate/errors.hpp"

namespace shortrate::cli {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InvalidInput("table has no column '" + name + "'");
}

std::vector<double> Table::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
}

namespace {

std::string format_number(double x) {
    // Locale-independent shortest form that still round-trips.
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw InvalidInput("row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << format_csv(table);
    if (!out) throw InvalidInput("failed writing " + path);
}

Table parse_csv(const std::string& text, const std::string& origin) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.columns = split(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": wrong number of fields");
        std::vector<double> row;
        for (const auto& c : cells) {
            double x = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), x);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw InvalidInput(origin + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
            row.push_back(x);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path);
}

}  // namespace shortrate::cli
