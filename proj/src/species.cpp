#include "mtload/species.hpp"

#include <cmath>

#include "mtload/errors.hpp"
#include "mtload/units.hpp"

namespace mtload {

SpeciesData chromium52(double lande_g_d) {
    SpeciesData cr{};
    cr.mass = 51.9405075 * PhysConstants::atomic_mass;
    cr.gamma_eg = 31.5e6;
    cr.gamma_ed = 127.0;
    cr.gamma_pd3 = 42.0;
    cr.wavelength_ps = 425.6e-9;
    cr.saturation_intensity = unit_convert(8.5, Unit::MilliWattPerCm2, Unit::WattPerM2);
    cr.lande_g_d = lande_g_d;
    cr.metastable_lifetime_lower_bound = 50.0;
    validate(cr);
    return cr;
}

void validate(const SpeciesData& s) {
    const double fields[] = {s.mass, s.gamma_eg, s.gamma_ed, s.gamma_pd3, s.wavelength_ps,
                             s.saturation_intensity, s.lande_g_d, s.metastable_lifetime_lower_bound};
    for (double f : fields) {
        if (!std::isfinite(f) || f <= 0.0) throw InvalidInput("species data must be positive and finite");
    }
}

}  // namespace mtload
