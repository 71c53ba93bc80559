#include "mtload/collisions.hpp"

#include <cmath>
#include <numbers>

#include "mtload/errors.hpp"
#include "mtload/numerics/quadrature.hpp"

namespace mtload {

double mean_collision_velocity(double t_mot, double t_mt, const SpeciesData& species) {
    if (t_mot < 0.0 || t_mt < 0.0) throw InvalidInput("temperatures must be nonnegative");
    if (t_mot == 0.0 && t_mt == 0.0) throw InvalidInput("at least one temperature must be positive");
    return std::sqrt((t_mot + t_mt) * 8.0 * PhysConstants::k_B / (std::numbers::pi * species.mass));
}

double excited_mot_density(double n_mot, double p_e, double v_mt) {
    if (!(v_mt > 0.0)) throw InvalidInput("trap volume must be positive");
    return n_mot * p_e / v_mt;
}

double overlap_correction(double size_ratio, double gravity_ratio) {
    if (!(size_ratio > 0.0) || size_ratio > 1.0) throw InvalidInput("size ratio sigma/r must lie in (0, 1]");
    if (std::abs(gravity_ratio) >= 1.0) throw UntrappedCloud("gravity ratio G/B must be below 1");
    // Lengths in units of the radial 1/e radius, so B = 1.
    const double sigma = size_ratio;
    const double norm = 1.0 / (std::pow(2.0 * std::numbers::pi, 1.5) * sigma * sigma * sigma);
    auto integrand = [&](double x, double y, double z) {
        const double r2 = x * x + y * y + z * z;
        const double gauss = norm * std::exp(-0.5 * r2 / (sigma * sigma));
        return gauss * std::exp(-std::sqrt(x * x + y * y + 4.0 * z * z) - gravity_ratio * y);
    };
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-8;
    return numerics::integrate_space(integrand, sigma, opts).value;
}

double cross_section_from_beta(double beta, double v) {
    if (!(v > 0.0)) throw InvalidInput("velocity must be positive");
    return beta / v;
}

}  // namespace mtload
