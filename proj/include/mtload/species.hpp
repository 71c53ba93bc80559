#pragma once

namespace mtload {

// CODATA 2018 exact / recommended values, SI.
struct PhysConstants {
    static constexpr double k_B = 1.380649e-23;          // J/K
    static constexpr double mu_B = 9.2740100783e-24;     // J/T
    static constexpr double g_accel = 9.80665;           // m/s^2
    static constexpr double h_planck = 6.62607015e-34;   // J s
    static constexpr double atomic_mass = 1.66053906660e-27;  // kg
};

// Atomic data for the three-level scheme g -> e (cooling), e -> d (leak into the
// metastable trapped state). Rates in 1/s, SI throughout.
struct SpeciesData {
    double mass;
    double gamma_eg;        // strong cooling decay e -> g
    double gamma_ed;        // weak leak e -> d
    double gamma_pd3;       // leak into the repumped second metastable level
    double wavelength_ps;   // m, cooling transition
    double saturation_intensity;  // W/m^2
    double lande_g_d;       // Lande factor of the trapped metastable level
    double metastable_lifetime_lower_bound;  // s

    double branching_ratio() const { return gamma_eg / gamma_ed; }

    // Mean magnetic moment g_d * m_d * mu_B for a mean Zeeman quantum number.
    double magnetic_moment(double mean_m_d) const { return lande_g_d * mean_m_d * PhysConstants::mu_B; }
};

// 52Cr reduced to 7S3 (g), 7P4 (e), 5D4 (d).
// The Lande factor of 5D4 defaults to the LS-coupling value 1.5; pass another value to override.
SpeciesData chromium52(double lande_g_d = 1.5);

// Throws InvalidInput when any field is non-positive or non-finite.
void validate(const SpeciesData& species);

}  // namespace mtload
