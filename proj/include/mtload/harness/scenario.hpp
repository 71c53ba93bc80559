#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mtload/species.hpp"

namespace mtload::harness {

// Invalid scenario; `field` is the dotted key path at fault (may be empty).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string field_path)
        : std::runtime_error(what), field(std::move(field_path)) {}
    std::string field;
};

enum class KeyKind { Number, Integer, Bool, Text, NumberList };

struct KeySpec {
    std::string_view key;
    KeyKind kind;
    std::string_view default_value;
    std::string_view column;  // short name used for sweep columns in output tables
    // For numeric keys: SI unit of the converted value and the conversion.
    std::string_view si_unit;
    double (*to_si)(double value, const SpeciesData& species);
};

std::span<const KeySpec> scenario_keys();
const KeySpec& key_spec(std::string_view key);  // throws ConfigError for unknown keys

// Line-oriented "section.key = value" settings with '#' comments. Every key has
// a default; unknown keys are errors.
class Scenario {
public:
    Scenario();  // all defaults

    static Scenario parse(std::string_view text, const std::string& source = "<scenario>");

    void set(const std::string& key, const std::string& value);

    double number(std::string_view key) const;
    long integer(std::string_view key) const;
    bool flag(std::string_view key) const;
    std::string text(std::string_view key) const;
    std::vector<double> list(std::string_view key) const;

    // Numeric value converted to SI via the key's declared unit.
    double si(std::string_view key, const SpeciesData& species) const;

    // Sorted "key = value" lines with normalized number formatting.
    std::vector<std::string> canonical_lines() const;
    std::uint64_t hash() const;

private:
    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace mtload::harness
