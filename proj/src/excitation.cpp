#include "mtload/excitation.hpp"

#include <cmath>

#include "mtload/errors.hpp"

namespace mtload {

double averaged_saturation_intensity(const SpeciesData& species) {
    return 7.0 / 3.0 * species.saturation_intensity;
}

double excitation_probability(const LightField& light, const SpeciesData& species) {
    if (!(light.single_beam_intensity >= 0.0) || light.beam_count < 1 || !std::isfinite(light.detuning)) {
        throw InvalidInput("light field needs intensity >= 0, beam_count >= 1 and finite detuning");
    }
    const double s = light.beam_count * light.single_beam_intensity / averaged_saturation_intensity(species);
    const double x = 2.0 * light.detuning / species.gamma_eg;
    return 0.5 * s / (1.0 + s + x * x);
}

double transfer_rate(double n_mot, double p_e, const SpeciesData& species, double efficiency) {
    if (n_mot < 0.0) throw InvalidInput("N_MOT must be nonnegative");
    if (efficiency < 0.0 || efficiency > 1.0) throw InvalidInput("transfer efficiency must lie in [0, 1]");
    return efficiency * n_mot * p_e * species.gamma_ed;
}

double efficiency_from_rate(double rate, double n_mot, double p_e, const SpeciesData& species) {
    const double denom = n_mot * p_e * species.gamma_ed;
    if (!(n_mot > 0.0) || !(p_e > 0.0) || denom == 0.0) {
        throw InvalidInput("efficiency needs N_MOT > 0 and P_e > 0");
    }
    return rate / denom;
}

}  // namespace mtload
