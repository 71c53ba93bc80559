#include "mtload/harness/table.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace mtload::harness {

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the table columns");
    rows.push_back(std::move(row));
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void ResultTable::write_csv(std::ostream& os) const {
    for (const auto& line : provenance) os << "# " << line << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i].header();
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
    for (const auto& line : trailer) os << "# " << line << '\n';
}

std::string ResultTable::to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& text, bool& ok) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    ok = res.ec == std::errc() && res.ptr == last;
    return v;
}

std::string bare_name(const std::string& header) {
    const auto p = header.find('(');
    return p == std::string::npos ? header : header.substr(0, p);
}

}  // namespace

CsvData parse_csv(std::istream& is, const std::string& source) {
    CsvData data;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            std::string text = line.substr(first + 1);
            if (!text.empty() && text.front() == ' ') text.erase(0, 1);
            data.comments.push_back(std::move(text));
            continue;
        }
        auto cells = split_commas(line);
        if (data.header.empty()) {
            for (const auto& c : cells) {
                if (c.empty()) throw DataParseError(source, lineno, "empty column name in header");
            }
            data.header = std::move(cells);
            continue;
        }
        if (cells.size() != data.header.size()) {
            throw DataParseError(source, lineno, "expected " + std::to_string(data.header.size()) + " fields, found " +
                                                     std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            bool ok = false;
            const double v = parse_double(c, ok);
            if (!ok) throw DataParseError(source, lineno, "not a number: '" + c + "'");
            row.push_back(v);
        }
        data.rows.push_back(std::move(row));
    }
    if (data.header.empty()) throw DataParseError(source, lineno, "no header row");
    return data;
}

std::size_t CsvData::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (bare_name(header[i]) == name) return i;
    }
    throw MissingColumn(std::string(name));
}

std::vector<double> CsvData::column(std::string_view name) const { return column(column_index(name)); }

std::vector<double> CsvData::column(std::size_t index) const {
    if (index >= header.size()) throw MissingColumn("#" + std::to_string(index));
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[index]);
    return out;
}

}  // namespace mtload::harness
