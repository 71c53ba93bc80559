#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mtload/numerics/ode.hpp"

namespace mtload {

// Trap volume as a function of time. The default law is linear growth
// V(t) = V0 (1 + alpha t); set `custom` to substitute another heating model.
struct VolumeLaw {
    double initial = 0.0;  // V0, m^3
    double growth = 0.0;   // alpha, 1/s
    // Returns {V(t), dV/dt}.
    std::function<std::pair<double, double>(double)> custom;

    std::pair<double, double> operator()(double t) const {
        if (custom) return custom(t);
        return {initial * (1.0 + growth * t), initial * growth};
    }
};

struct RateModel {
    double loading_rate = 0.0;      // R, 1/s
    double total_decay_rate = 0.0;  // Gamma = 1/tau with the MOT on, 1/s
    double background_lifetime = std::numeric_limits<double>::infinity();  // t0, s
    double two_body_coeff = 0.0;    // beta, m^3/s
    VolumeLaw volume;
};

struct TrajectorySample {
    double time = 0.0;          // s
    double peak_density = 0.0;  // 1/m^3
    double atom_number = 0.0;
    double volume = 0.0;        // m^3
};

using Trajectory = std::vector<TrajectorySample>;

// N(t) = (R / Gamma) (1 - exp(-Gamma t)); Gamma = 0 gives N = R t.
double loading_curve(double rate, double gamma, double t);

// N0 = R / Gamma. Throws NoSteadyState for Gamma = 0.
double steady_state_population(double rate, double gamma);

// Gamma_total = gamma_background + n_e sigma_ed v
double mot_on_decay_rate(double n_e, double sigma_ed, double v, double gamma_background);
// The background-subtracted part n_e sigma_ed v.
double collisional_decay_rate(double n_e, double sigma_ed, double v);

// Integrates dn0/dt = -n0/t0 - beta n0^2 - (n0/V) dV/dt with the MOT off.
// Samples at 0, dt_hint, 2 dt_hint, ... and at t_end; the internal step is
// adaptive and capped at dt_hint.
Trajectory integrate_mt_decay(double initial_density, const RateModel& model, double t_end, double dt_hint,
                              numerics::OdeOptions opts = {});

// Same equation sampled at explicit ascending times (first may be 0).
Trajectory integrate_mt_decay_at(double initial_density, const RateModel& model, std::span<const double> times,
                                 numerics::OdeOptions opts = {});

}  // namespace mtload
