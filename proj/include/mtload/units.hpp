#pragma once

#include <string_view>

namespace mtload {

// Units accepted at I/O boundaries. Everything inside the library is SI.
enum class Unit {
    GaussPerCm,
    TeslaPerM,
    MicroKelvin,
    Kelvin,
    MilliWattPerCm2,
    WattPerM2,
    Micrometer,
    Meter,
    PerCm3,
    PerM3,
};

// Exact linear rescaling between two units of the same dimension.
// Throws InvalidInput for pairs of different dimension.
double unit_convert(double value, Unit from, Unit to);

// Parses names such as "G/cm", "uK", "µK", "mW/cm2", "cm^-3".
Unit parse_unit(std::string_view name);
std::string_view unit_name(Unit unit);

}  // namespace mtload
