#include "mtload/harness/scenario.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

#include "mtload/harness/table.hpp"
#include "mtload/random.hpp"
#include "mtload/units.hpp"

namespace mtload::harness {
namespace {

double same(double v, const SpeciesData&) { return v; }
double gauss_per_cm(double v, const SpeciesData&) { return unit_convert(v, Unit::GaussPerCm, Unit::TeslaPerM); }
double micro_kelvin(double v, const SpeciesData&) { return unit_convert(v, Unit::MicroKelvin, Unit::Kelvin); }
double micrometer(double v, const SpeciesData&) { return unit_convert(v, Unit::Micrometer, Unit::Meter); }
double per_cm3(double v, const SpeciesData&) { return unit_convert(v, Unit::PerCm3, Unit::PerM3); }
double in_isat(double v, const SpeciesData& s) { return v * s.saturation_intensity; }
double in_gamma_eg(double v, const SpeciesData& s) { return v * s.gamma_eg; }

constexpr std::array kKeys{
    KeySpec{"species.name", KeyKind::Text, "chromium52", "species", "", nullptr},
    KeySpec{"species.lande_g_d", KeyKind::Number, "1.5", "g_d", "1", same},

    KeySpec{"trap.gradient_G_per_cm", KeyKind::Number, "10", "gradient", "T/m", gauss_per_cm},
    KeySpec{"trap.beam_intensity_Isat", KeyKind::Number, "15", "beam_intensity", "W/m^2", in_isat},
    KeySpec{"trap.beam_count", KeyKind::Integer, "6", "beam_count", "1", same},
    KeySpec{"trap.detuning_gamma", KeyKind::Number, "-2", "detuning", "rad/s", in_gamma_eg},
    KeySpec{"trap.mot_atom_number", KeyKind::Number, "1.1e7", "N_MOT", "1", same},
    KeySpec{"trap.mot_sigma_um", KeyKind::Number, "200", "sigma_MOT", "m", micrometer},
    KeySpec{"trap.mot_temperature_uK", KeyKind::Number, "300", "T_MOT", "K", micro_kelvin},

    KeySpec{"cloud.temperature_uK", KeyKind::Number, "100", "T_MT", "K", micro_kelvin},
    KeySpec{"cloud.mean_m_d", KeyKind::Number, "4", "mean_m_d", "1", same},
    KeySpec{"cloud.atom_number", KeyKind::Number, "1e8", "N_MT", "1", same},

    KeySpec{"rates.efficiency", KeyKind::Number, "0.32", "eta", "1", same},
    KeySpec{"rates.sigma_ed_m2", KeyKind::Number, "1e-15", "sigma_ed", "m^2", same},
    KeySpec{"rates.background_rate_per_s", KeyKind::Number, "0.2", "gamma_background", "1/s", same},
    KeySpec{"rates.apply_overlap_correction", KeyKind::Bool, "false", "apply_overlap_correction", "", nullptr},

    KeySpec{"loading.t_end_s", KeyKind::Number, "5", "t_end", "s", same},
    KeySpec{"loading.samples", KeyKind::Integer, "30", "samples", "1", same},

    KeySpec{"decay.initial_density_per_cm3", KeyKind::Number, "1e10", "n0_initial", "1/m^3", per_cm3},
    KeySpec{"decay.t0_s", KeyKind::Number, "60", "t0", "s", same},
    KeySpec{"decay.beta_m3_per_s", KeyKind::Number, "7e-17", "beta", "m^3/s", same},
    KeySpec{"decay.volume_growth_per_s", KeyKind::Number, "0.1", "alpha", "1/s", same},
    KeySpec{"decay.t_end_s", KeyKind::Number, "5", "t_end", "s", same},
    KeySpec{"decay.samples", KeyKind::Integer, "26", "samples", "1", same},

    KeySpec{"noise.relative_sigma", KeyKind::Number, "0", "noise_sigma", "1", same},
    KeySpec{"noise.seed", KeyKind::Integer, "1", "seed", "1", same},

    KeySpec{"sweep.parameter", KeyKind::Text, "", "sweep_parameter", "", nullptr},
    KeySpec{"sweep.values", KeyKind::NumberList, "", "sweep_values", "", nullptr},

    KeySpec{"figure2.detunings_gamma", KeyKind::NumberList, "-2, -5, -8", "detunings", "", nullptr},
    KeySpec{"figure2.efficiencies", KeyKind::NumberList, "0.32, 0.25, 0.16", "efficiencies", "", nullptr},
    KeySpec{"figure3.detunings_gamma", KeyKind::NumberList, "-2, -5, -8", "detunings", "", nullptr},
    KeySpec{"figure4.light_shift", KeyKind::Number, "0", "light_shift", "1", same},
    KeySpec{"figure4.t_mot_offset_uK", KeyKind::Number, "100", "T_MOT_offset", "K", micro_kelvin},
    KeySpec{"figure4.t_mot_slope_uK", KeyKind::Number, "10", "T_MOT_slope", "K", micro_kelvin},

    KeySpec{"mc.particles", KeyKind::Integer, "100000", "particles", "1", same},
    KeySpec{"mc.threads", KeyKind::Integer, "1", "threads", "1", same},
    KeySpec{"mc.potential", KeyKind::Text, "isotropic", "potential", "", nullptr},
    KeySpec{"mc.pumping", KeyKind::Text, "mean", "pumping", "", nullptr},

    KeySpec{"image.pixels", KeyKind::Integer, "64", "pixels", "1", same},
    KeySpec{"image.half_width_um", KeyKind::Number, "2000", "half_width", "m", micrometer},
    KeySpec{"image.mode", KeyKind::Text, "column_z", "mode", "", nullptr},
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_number(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        if (!parse_number(trim(cell), v)) throw ConfigError(key + ": not a finite number: '" + trim(cell) + "'", key);
        out.push_back(v);
    }
    return out;
}

// Validates and normalizes a raw value for its key.
std::string canonical_value(const KeySpec& spec, const std::string& raw) {
    const std::string key(spec.key);
    const std::string value = trim(raw);
    switch (spec.kind) {
        case KeyKind::Number: {
            double v = 0.0;
            if (!parse_number(value, v)) throw ConfigError(key + ": not a finite number: '" + value + "'", key);
            return format_number(v);
        }
        case KeyKind::Integer: {
            double v = 0.0;
            if (!parse_number(value, v) || v != std::floor(v) || std::abs(v) > 9.007199254740992e15) {
                throw ConfigError(key + ": not an integer: '" + value + "'", key);
            }
            return format_number(v);
        }
        case KeyKind::Bool:
            if (value == "true" || value == "false") return value;
            throw ConfigError(key + ": expected true or false, got '" + value + "'", key);
        case KeyKind::Text:
            return value;
        case KeyKind::NumberList: {
            std::string out;
            for (double v : parse_list(key, value)) {
                if (!out.empty()) out += ", ";
                out += format_number(v);
            }
            return out;
        }
    }
    return value;
}

}  // namespace

std::span<const KeySpec> scenario_keys() { return kKeys; }

const KeySpec& key_spec(std::string_view key) {
    for (const auto& k : kKeys) {
        if (k.key == key) return k;
    }
    throw ConfigError("unknown scenario key '" + std::string(key) + "'", std::string(key));
}

Scenario::Scenario() {
    for (const auto& k : kKeys) values_.emplace(std::string(k.key), canonical_value(k, std::string(k.default_value)));
}

Scenario Scenario::parse(std::string_view text, const std::string& source) {
    Scenario sc;
    std::map<std::string, std::size_t> seen;
    std::istringstream ss{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'", "");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        try {
            key_spec(key);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what(), key);
        }
        if (auto [it, fresh] = seen.emplace(key, lineno); !fresh) {
            throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")",
                              key);
        }
        try {
            sc.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what(), e.field);
        }
    }
    return sc;
}

void Scenario::set(const std::string& key, const std::string& value) {
    const auto& spec = key_spec(key);
    values_[key] = canonical_value(spec, value);
}

double Scenario::number(std::string_view key) const {
    const auto& spec = key_spec(key);
    if (spec.kind != KeyKind::Number && spec.kind != KeyKind::Integer) {
        throw ConfigError(std::string(key) + " is not numeric", std::string(key));
    }
    double v = 0.0;
    parse_number(values_.find(key)->second, v);
    return v;
}

long Scenario::integer(std::string_view key) const {
    if (key_spec(key).kind != KeyKind::Integer) throw ConfigError(std::string(key) + " is not an integer key", std::string(key));
    return static_cast<long>(number(key));
}

bool Scenario::flag(std::string_view key) const {
    if (key_spec(key).kind != KeyKind::Bool) throw ConfigError(std::string(key) + " is not a boolean key", std::string(key));
    return values_.find(key)->second == "true";
}

std::string Scenario::text(std::string_view key) const {
    key_spec(key);
    return values_.find(key)->second;
}

std::vector<double> Scenario::list(std::string_view key) const {
    if (key_spec(key).kind != KeyKind::NumberList) throw ConfigError(std::string(key) + " is not a list key", std::string(key));
    return parse_list(std::string(key), values_.find(key)->second);
}

double Scenario::si(std::string_view key, const SpeciesData& species) const {
    const auto& spec = key_spec(key);
    if (!spec.to_si) throw ConfigError(std::string(key) + " has no SI conversion", std::string(key));
    return spec.to_si(number(key), species);
}

std::vector<std::string> Scenario::canonical_lines() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k + " = " + v);
    return out;
}

std::uint64_t Scenario::hash() const {
    std::uint64_t h = fnv1a64("");
    for (const auto& line : canonical_lines()) {
        h = fnv1a64(line, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace mtload::harness
