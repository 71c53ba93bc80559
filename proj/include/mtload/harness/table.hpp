#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtload::harness {

// Malformed data file; carries the 1-based line number.
class DataParseError : public std::runtime_error {
public:
    DataParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_number(line) {}
    std::size_t line_number;
};

class MissingColumn : public std::runtime_error {
public:
    explicit MissingColumn(const std::string& name) : std::runtime_error("missing column '" + name + "'") {}
};

struct Column {
    std::string name;
    std::string unit;  // "1" for dimensionless
    std::string header() const { return name + "(" + unit + ")"; }
};

// Rectangular numeric table written as CSV: '#' provenance lines, a
// "name(unit)" header row, data rows, then optional '#' trailer lines.
struct ResultTable {
    std::vector<std::string> provenance;
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> trailer;

    void add_row(std::vector<double> row);
    void write_csv(std::ostream& os) const;
    std::string to_csv() const;
};

// Shortest decimal that round-trips to the same double; locale independent.
std::string format_number(double value);

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  // text after '#', in file order

    // Matches either the full header ("t(s)") or the bare name ("t").
    std::size_t column_index(std::string_view name) const;
    std::vector<double> column(std::string_view name) const;
    std::vector<double> column(std::size_t index) const;
};

CsvData parse_csv(std::istream& is, const std::string& source);

}  // namespace mtload::harness
