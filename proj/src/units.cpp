#include "mtload/units.hpp"

#include <array>
#include <string>
#include <utility>

#include "mtload/errors.hpp"

namespace mtload {
namespace {

enum class Dimension { Gradient, Temperature, Intensity, Length, NumberDensity };

struct UnitInfo {
    Unit unit;
    Dimension dim;
    double to_si;
    std::string_view name;
};

constexpr std::array<UnitInfo, 10> kUnits{{
    {Unit::GaussPerCm, Dimension::Gradient, 1e-2, "G/cm"},  // 1e-4 T per 1e-2 m
    {Unit::TeslaPerM, Dimension::Gradient, 1.0, "T/m"},
    {Unit::MicroKelvin, Dimension::Temperature, 1e-6, "uK"},
    {Unit::Kelvin, Dimension::Temperature, 1.0, "K"},
    {Unit::MilliWattPerCm2, Dimension::Intensity, 10.0, "mW/cm^2"},
    {Unit::WattPerM2, Dimension::Intensity, 1.0, "W/m^2"},
    {Unit::Micrometer, Dimension::Length, 1e-6, "um"},
    {Unit::Meter, Dimension::Length, 1.0, "m"},
    {Unit::PerCm3, Dimension::NumberDensity, 1e6, "cm^-3"},
    {Unit::PerM3, Dimension::NumberDensity, 1.0, "m^-3"},
}};

const UnitInfo& info(Unit unit) {
    for (const auto& u : kUnits) {
        if (u.unit == unit) return u;
    }
    throw InvalidInput("unknown unit");
}

}  // namespace

double unit_convert(double value, Unit from, Unit to) {
    const auto& a = info(from);
    const auto& b = info(to);
    if (a.dim != b.dim) {
        throw InvalidInput("unsupported unit conversion " + std::string(a.name) + " -> " + std::string(b.name));
    }
    if (from == to) return value;
    // Scale factors are powers of ten; dividing by the SI factor keeps round trips exact
    // where a precomputed ratio would not.
    return a.to_si >= b.to_si ? value * (a.to_si / b.to_si) : value / (b.to_si / a.to_si);
}

Unit parse_unit(std::string_view name) {
    static constexpr std::array<std::pair<std::string_view, Unit>, 8> aliases{{
        {"µK", Unit::MicroKelvin},
        {"mW/cm2", Unit::MilliWattPerCm2},
        {"W/m2", Unit::WattPerM2},
        {"µm", Unit::Micrometer},
        {"cm-3", Unit::PerCm3},
        {"m-3", Unit::PerM3},
        {"1/cm^3", Unit::PerCm3},
        {"1/m^3", Unit::PerM3},
    }};
    for (const auto& u : kUnits) {
        if (u.name == name) return u.unit;
    }
    for (const auto& [alias, unit] : aliases) {
        if (alias == name) return unit;
    }
    throw InvalidInput("unknown unit '" + std::string(name) + "'");
}

std::string_view unit_name(Unit unit) { return info(unit).name; }

}  // namespace mtload
