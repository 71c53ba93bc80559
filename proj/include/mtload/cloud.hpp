#pragma once

// Thermal cloud in a linear quadrupole trap with gravity along -y:
//   n(x, y, z) = n0 exp(-B sqrt(x^2 + y^2 + 4 z^2) - G y),
//   B = mu_bar b / (2 k_B T),  G = m g / (k_B T).
// y is vertical, z is the coil axis (gradient 2b).

#include "mtload/species.hpp"

namespace mtload {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct QuadrupoleField {
    double gradient = 0.0;  // T/m, radial; axial is twice this
};

struct MotCloud {
    double size_sigma = 0.0;   // m, Gaussian rms radius per axis
    double temperature = 0.0;  // K
    double atom_number = 0.0;
};

struct ShapeParams {
    double shape_b = 0.0;  // 1/m
    double shape_g = 0.0;  // 1/m
};

struct CloudState {
    double atom_number = 0.0;
    double temperature = 0.0;           // K
    double mean_magnetic_moment = 0.0;  // J/T
    double shape_b = 0.0;
    double shape_g = 0.0;
    double peak_density = 0.0;      // 1/m^3
    double effective_volume = 0.0;  // m^3, N = n0 V
};

enum class ProjectionAxis { X, Z };

double density_at(const Point3& p, const CloudState& cloud);

ShapeParams shape_params(double temperature, double mu_bar, const QuadrupoleField& field, const SpeciesData& species);

// Inverse relations used by thermometry on a fitted (B, G) pair.
double temperature_from_shape_g(double shape_g, const SpeciesData& species);
double moment_from_shape(double shape_b, double shape_g, const QuadrupoleField& field, const SpeciesData& species);

// V = integral of n/n0 over all space, by adaptive quadrature in rescaled
// spherical coordinates (z' = 2z). Throws UntrappedCloud when |G| >= B.
double effective_volume(double shape_b, double shape_g);

// Builds the full equilibrium state from (N, T, mu_bar, b).
CloudState make_cloud(double atom_number, double temperature, double mu_bar, const QuadrupoleField& field,
                      const SpeciesData& species);

double de_broglie_wavelength(double temperature, const SpeciesData& species);
double phase_space_density(double peak_density, double temperature, const SpeciesData& species);

// Temperature rise from the potential energy of a Gaussian MOT of radius sigma
// released at the trap centre: 8/(9 sqrt(2 pi)) mu_bar b sigma / k_B.
double virial_temperature_offset(const MotCloud& mot, const QuadrupoleField& field, double mu_bar);

// T_MT = T_MOT / 3 + offset. b is the configured radial gradient.
double predict_mt_temperature(const MotCloud& mot, const QuadrupoleField& field, double mu_bar);

double one_over_e_radius(double shape_b);
double axial_one_over_e_radius(double shape_b);

// Line-of-sight integral of the density through (u, y), where u is the remaining
// horizontal image coordinate (x when projecting along z, z when projecting along x).
// Evaluated by quadrature; 1/m^2.
double column_density(const CloudState& cloud, ProjectionAxis axis, double u, double y);

}  // namespace mtload
