#include "mtload/cloud.hpp"

#include <cmath>
#include <numbers>

#include "mtload/errors.hpp"
#include "mtload/numerics/quadrature.hpp"

namespace mtload {

using PC = PhysConstants;

double density_at(const Point3& p, const CloudState& cloud) {
    const double rho = std::sqrt(p.x * p.x + p.y * p.y + 4.0 * p.z * p.z);
    return cloud.peak_density * std::exp(-cloud.shape_b * rho - cloud.shape_g * p.y);
}

ShapeParams shape_params(double temperature, double mu_bar, const QuadrupoleField& field, const SpeciesData& species) {
    if (!(temperature > 0.0)) throw InvalidInput("temperature must be positive");
    const double kt = PC::k_B * temperature;
    return {mu_bar * field.gradient / (2.0 * kt), species.mass * PC::g_accel / kt};
}

double temperature_from_shape_g(double shape_g, const SpeciesData& species) {
    if (!(shape_g > 0.0)) throw InvalidInput("gravity parameter must be positive");
    return species.mass * PC::g_accel / (PC::k_B * shape_g);
}

double moment_from_shape(double shape_b, double shape_g, const QuadrupoleField& field, const SpeciesData& species) {
    if (!(shape_g > 0.0) || !(field.gradient > 0.0)) throw InvalidInput("need G > 0 and b > 0");
    return 2.0 * species.mass * PC::g_accel * shape_b / (field.gradient * shape_g);
}

double effective_volume(double shape_b, double shape_g) {
    if (!(shape_b > 0.0)) throw InvalidInput("shape parameter B must be positive");
    if (std::abs(shape_g) >= shape_b) {
        throw UntrappedCloud("gravity parameter G >= B: the cloud is not held against gravity");
    }
    // In z' = 2z the profile is isotropic apart from gravity, and dz = dz'/2.
    auto integrand = [&](double x, double y, double z) {
        return std::exp(-shape_b * std::sqrt(x * x + y * y + z * z) - shape_g * y);
    };
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-9;
    const auto res = numerics::integrate_space(integrand, 1.0 / shape_b, opts);
    return 0.5 * res.value;
}

CloudState make_cloud(double atom_number, double temperature, double mu_bar, const QuadrupoleField& field,
                      const SpeciesData& species) {
    if (!(atom_number > 0.0)) throw InvalidInput("atom number must be positive");
    if (!(mu_bar > 0.0) || !(field.gradient > 0.0)) throw InvalidInput("need mu_bar > 0 and b > 0");
    const auto shape = shape_params(temperature, mu_bar, field, species);
    CloudState c;
    c.atom_number = atom_number;
    c.temperature = temperature;
    c.mean_magnetic_moment = mu_bar;
    c.shape_b = shape.shape_b;
    c.shape_g = shape.shape_g;
    c.effective_volume = effective_volume(shape.shape_b, shape.shape_g);
    c.peak_density = atom_number / c.effective_volume;
    return c;
}

double de_broglie_wavelength(double temperature, const SpeciesData& species) {
    if (!(temperature > 0.0)) throw InvalidInput("temperature must be positive");
    return PC::h_planck / std::sqrt(2.0 * std::numbers::pi * species.mass * PC::k_B * temperature);
}

double phase_space_density(double peak_density, double temperature, const SpeciesData& species) {
    if (peak_density < 0.0) throw InvalidInput("density must be nonnegative");
    const double lambda = de_broglie_wavelength(temperature, species);
    return peak_density * lambda * lambda * lambda;
}

double virial_temperature_offset(const MotCloud& mot, const QuadrupoleField& field, double mu_bar) {
    const double prefactor = 8.0 / (9.0 * std::sqrt(2.0 * std::numbers::pi));
    return prefactor * mu_bar * field.gradient * mot.size_sigma / PC::k_B;
}

double predict_mt_temperature(const MotCloud& mot, const QuadrupoleField& field, double mu_bar) {
    if (mot.size_sigma < 0.0 || mot.temperature < 0.0 || field.gradient < 0.0) {
        throw InvalidInput("MOT size, temperature and gradient must be nonnegative");
    }
    return mot.temperature / 3.0 + virial_temperature_offset(mot, field, mu_bar);
}

double one_over_e_radius(double shape_b) {
    if (!(shape_b > 0.0)) throw InvalidInput("shape parameter B must be positive");
    return 1.0 / shape_b;
}

double axial_one_over_e_radius(double shape_b) { return 0.5 * one_over_e_radius(shape_b); }

double column_density(const CloudState& cloud, ProjectionAxis axis, double u, double y) {
    // Symmetric in the line-of-sight coordinate s, so integrate [0, inf) and double.
    // s = L t / (1 - t) maps the half line onto [0, 1).
    const double length = axis == ProjectionAxis::Z ? 0.5 / cloud.shape_b : 1.0 / cloud.shape_b;
    auto integrand = [&](double t) {
        const double one_minus = 1.0 - t;
        const double s = length * t / one_minus;
        const Point3 p = axis == ProjectionAxis::Z ? Point3{u, y, s} : Point3{s, y, u};
        return density_at(p, cloud) * length / (one_minus * one_minus);
    };
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-11;
    return 2.0 * numerics::integrate_adaptive(integrand, 0.0, 1.0, opts).value;
}

}  // namespace mtload
