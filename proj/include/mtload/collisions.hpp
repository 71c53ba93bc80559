#pragma once

#include "mtload/species.hpp"

namespace mtload {

struct CollisionInput {
    double t_mot = 0.0;     // K
    double t_mt = 0.0;      // K
    double sigma_ed = 0.0;  // m^2, excited MOT atom + trapped atom
    double sigma_dd = 0.0;  // m^2, trapped + trapped, from beta
};

// v = sqrt(8 k_B (T_MOT + T_MT) / (pi m))
double mean_collision_velocity(double t_mot, double t_mt, const SpeciesData& species);

// n_e = N_MOT P_e / V_MT, the excited MOT atoms spread over the trap volume.
double excited_mot_density(double n_mot, double p_e, double v_mt);

// Gaussian-weighted mean of n_MT / n_MT(0) for a MOT of rms radius sigma at the trap
// centre, with sigma/r the ratio to the radial 1/e radius r = 1/B. `gravity_ratio`
// is G/B (0 neglects the sag inside the MOT region). Tends to 1 as sigma/r -> 0.
double overlap_correction(double size_ratio, double gravity_ratio = 0.0);

// sigma = beta / v
double cross_section_from_beta(double beta, double v);

}  // namespace mtload
