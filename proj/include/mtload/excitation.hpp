#pragma once

#include "mtload/species.hpp"

namespace mtload {

struct LightField {
    double single_beam_intensity = 0.0;  // W/m^2
    int beam_count = 6;                  // retroreflected passes counted individually
    double detuning = 0.0;               // rad/s, omega_laser - omega_atom (< 0 red)
};

// Polarization-averaged saturation intensity <I_s> = 7/3 I_s.
double averaged_saturation_intensity(const SpeciesData& species);

// Steady-state two-level excited fraction
//   P_e = (s/2) / (1 + s + (2 Delta / Gamma_eg)^2),  s = beam_count * I / <I_s>.
double excitation_probability(const LightField& light, const SpeciesData& species);

// R = eta * N_MOT * P_e * Gamma_ed
double transfer_rate(double n_mot, double p_e, const SpeciesData& species, double efficiency);

// eta = R / (N_MOT * P_e * Gamma_ed)
double efficiency_from_rate(double rate, double n_mot, double p_e, const SpeciesData& species);

}  // namespace mtload
