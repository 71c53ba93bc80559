#include "mtload/dynamics.hpp"

#include <cmath>

#include "mtload/errors.hpp"

namespace mtload {

double loading_curve(double rate, double gamma, double t) {
    if (gamma < 0.0) throw InvalidInput("decay rate must be nonnegative");
    if (t < 0.0) throw InvalidInput("time must be nonnegative");
    if (gamma == 0.0) return rate * t;
    return -(rate / gamma) * std::expm1(-gamma * t);
}

double steady_state_population(double rate, double gamma) {
    if (gamma < 0.0) throw InvalidInput("decay rate must be nonnegative");
    if (gamma == 0.0) throw NoSteadyState("no loss channel: the trap population grows without bound");
    return rate / gamma;
}

double collisional_decay_rate(double n_e, double sigma_ed, double v) {
    if (n_e < 0.0 || sigma_ed < 0.0 || v < 0.0) throw InvalidInput("collision inputs must be nonnegative");
    return n_e * sigma_ed * v;
}

double mot_on_decay_rate(double n_e, double sigma_ed, double v, double gamma_background) {
    if (gamma_background < 0.0) throw InvalidInput("background rate must be nonnegative");
    return gamma_background + collisional_decay_rate(n_e, sigma_ed, v);
}

Trajectory integrate_mt_decay_at(double initial_density, const RateModel& model, std::span<const double> times,
                                 numerics::OdeOptions opts) {
    if (!(initial_density > 0.0)) throw InvalidInput("initial density must be positive");
    if (model.two_body_coeff < 0.0 || !(model.background_lifetime > 0.0)) {
        throw InvalidInput("need beta >= 0 and t0 > 0");
    }
    if (!model.volume.custom && (!(model.volume.initial > 0.0) || model.volume.growth < 0.0)) {
        throw InvalidInput("volume law needs V0 > 0 and alpha >= 0");
    }
    const double inv_t0 = std::isinf(model.background_lifetime) ? 0.0 : 1.0 / model.background_lifetime;
    const double beta = model.two_body_coeff;
    const VolumeLaw& law = model.volume;
    numerics::OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dydt) {
        const auto [v, dv] = law(t);
        const double n = y[0];
        dydt[0] = -n * inv_t0 - beta * n * n - n * dv / v;
    };
    numerics::DormandPrince solver(opts);
    const auto states = solver.solve(rhs, 0.0, {initial_density}, times);

    Trajectory out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double v = law(times[i]).first;
        const double n = states[i][0];
        out.push_back({times[i], n, n * v, v});
    }
    return out;
}

Trajectory integrate_mt_decay(double initial_density, const RateModel& model, double t_end, double dt_hint,
                              numerics::OdeOptions opts) {
    if (!(t_end > 0.0) || !(dt_hint > 0.0)) throw InvalidInput("need t_end > 0 and dt_hint > 0");
    std::vector<double> times;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt_hint;
        if (t >= t_end * (1.0 - 1e-12)) break;
        times.push_back(t);
    }
    times.push_back(t_end);
    opts.max_step = std::min(opts.max_step, dt_hint);
    return integrate_mt_decay_at(initial_density, model, times, opts);
}

}  // namespace mtload
