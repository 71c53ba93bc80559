#include "mtload/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mtload/numerics/ode.hpp"

namespace mtload {

using numerics::LevMarResult;
using PC = PhysConstants;

void SampleSeries::validate(bool strictly_increasing) const {
    if (x.size() != y.size()) throw InvalidInput("x and y have different lengths");
    if (!uncertainty.empty() && uncertainty.size() != x.size()) {
        throw InvalidInput("uncertainty column length differs from the data");
    }
    for (double s : uncertainty) {
        if (!(s > 0.0)) throw InvalidInput("uncertainties must be positive");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput("non-finite sample");
        if (strictly_increasing && i > 0 && !(x[i] > x[i - 1])) throw InvalidInput("x must be strictly increasing");
    }
}

const FitParameter& FitResult::get(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return p;
    for (const auto& p : derived)
        if (p.name == name) return p;
    throw InvalidInput("fit result has no parameter '" + name + "'");
}

namespace {

FitResult from_levmar(const LevMarResult& lm, std::vector<FitParameter> params) {
    FitResult fit;
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i].value = lm.params[static_cast<Eigen::Index>(i)];
        params[i].std_error = lm.std_errors[static_cast<Eigen::Index>(i)];
    }
    fit.parameters = std::move(params);
    fit.covariance = lm.covariance;
    fit.residual_norm = lm.residual_norm;
    fit.converged = lm.converged;
    fit.iterations = lm.iterations;
    fit.notes.push_back(lm.message);
    return fit;
}

void require_converged(const FitResult& fit, const std::string& fitter) {
    if (!fit.converged) {
        throw FitFailure(fitter + " fit did not converge: " + (fit.notes.empty() ? "" : fit.notes.back()), fit);
    }
}

// Standard error of f(p) from the covariance and the gradient of f.
double propagate(const Eigen::MatrixXd& cov, const Eigen::VectorXd& grad) {
    return std::sqrt(std::max(0.0, grad.dot(cov * grad)));
}

}  // namespace

// ---------------------------------------------------------------- loading curve

FitResult fit_loading_curve(const SampleSeries& data, const LoadingFitOptions& opts) {
    data.validate(true);
    if (data.size() < 5) throw InvalidInput("loading fit needs at least 5 samples");
    const auto [ymin_it, ymax_it] = std::minmax_element(data.y.begin(), data.y.end());
    if (*ymin_it == *ymax_it) throw InvalidInput("degenerate loading data: all samples equal");
    if (!(*ymax_it > 0.0)) throw InvalidInput("loading data has no positive samples");

    // Initial guesses: N0 from the largest sample, tau from the first crossing of (1 - 1/e) N0.
    const double n0_guess = *ymax_it;
    const double level = (1.0 - std::exp(-1.0)) * n0_guess;
    double tau_guess = data.x.back();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.y[i] >= level) {
            if (i == 0) {
                tau_guess = data.x[0];
            } else {
                const double f = (level - data.y[i - 1]) / (data.y[i] - data.y[i - 1]);
                tau_guess = data.x[i - 1] + f * (data.x[i] - data.x[i - 1]);
            }
            break;
        }
    }
    const double span = data.x.back() - data.x.front();
    if (!(tau_guess > 0.0)) tau_guess = span / static_cast<double>(data.size());

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double model = -p[0] * std::expm1(-data.x[i] / p[1]);
            double ri = model - data.y[i];
            if (data.weighted()) ri /= data.uncertainty[i];
            else if (opts.relative_noise) ri /= std::max(std::abs(model), 0.01 * std::abs(p[0]));
            r[static_cast<Eigen::Index>(i)] = ri;
        }
        return r;
    };
    Eigen::VectorXd p0(2);
    p0 << n0_guess, tau_guess;
    Eigen::VectorXd lower(2);
    lower << -std::numeric_limits<double>::infinity(), 1e-9 * tau_guess;
    const auto lm = numerics::levenberg_marquardt(residuals, p0, p0.cwiseAbs(), opts.levmar, lower);
    FitResult fit = from_levmar(lm, {{"N0", 0, 0, "1"}, {"tau", 0, 0, "s"}});
    require_converged(fit, "loading-curve");

    const double n0 = fit.value("N0");
    const double tau = fit.value("tau");
    Eigen::VectorXd grad(2);
    grad << 1.0 / tau, -n0 / (tau * tau);
    fit.derived.push_back({"R", n0 / tau, propagate(fit.covariance, grad), "1/s"});
    if (tau > span) {
        fit.low_confidence = true;
        fit.notes.push_back("fitted tau exceeds the sampled time span");
    }
    return fit;
}

// ---------------------------------------------------------------- straight line

FitResult fit_linear(const SampleSeries& data) {
    data.validate(false);
    const std::size_t n = data.size();
    if (n < 3) throw InvalidInput("linear fit needs at least 3 points");

    auto weight = [&](std::size_t i) {
        return data.weighted() ? 1.0 / (data.uncertainty[i] * data.uncertainty[i]) : 1.0;
    };
    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += weight(i);
        swx += weight(i) * data.x[i];
        swy += weight(i) * data.y[i];
    }
    const double xbar = swx / sw;
    const double ybar = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = data.x[i] - xbar;
        sxx += weight(i) * dx * dx;
        sxy += weight(i) * dx * (data.y[i] - ybar);
    }
    if (!(sxx > 0.0)) throw InvalidInput("degenerate x: zero variance");
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;

    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = data.y[i] - (slope * data.x[i] + intercept);
        chi2 += weight(i) * r * r;
    }
    // Covariance scaled by the reduced chi-square, as for the nonlinear fits.
    const double s2 = chi2 / static_cast<double>(n - 2);
    FitResult fit;
    fit.covariance.resize(2, 2);
    fit.covariance(0, 0) = s2 / sxx;
    fit.covariance(1, 1) = s2 * (1.0 / sw + xbar * xbar / sxx);
    fit.covariance(0, 1) = fit.covariance(1, 0) = -s2 * xbar / sxx;
    fit.parameters = {{"slope", slope, std::sqrt(fit.covariance(0, 0)), ""},
                      {"intercept", intercept, std::sqrt(fit.covariance(1, 1)), ""}};
    fit.residual_norm = std::sqrt(chi2);
    fit.converged = true;
    fit.iterations = 1;
    return fit;
}

FitResult fit_linear_proportional(const SampleSeries& data, int passes) {
    SampleSeries work{data.x, data.y, {}};
    FitResult fit = fit_linear(work);
    for (int k = 0; k < passes; ++k) {
        const double slope = fit.value("slope"), intercept = fit.value("intercept");
        double floor = 0.0;
        for (double x : work.x) floor = std::max(floor, std::abs(slope * x + intercept));
        if (!(floor > 0.0)) break;
        work.uncertainty.clear();
        for (double x : work.x) work.uncertainty.push_back(std::max(std::abs(slope * x + intercept), 1e-6 * floor));
        fit = fit_linear(work);
    }
    fit.iterations = passes + 1;
    return fit;
}

// ---------------------------------------------------------------- density image

void DensityImage::validate() const {
    if (cols < 2 || rows < 2) throw InvalidInput("image needs at least 2x2 pixels");
    if (!(pitch > 0.0)) throw InvalidInput("pixel pitch must be positive");
    if (values.size() != static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows)) {
        throw InvalidInput("image value count does not match its dimensions");
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw InvalidInput("image values must be finite and nonnegative");
    }
}

namespace {

// rho K1(B rho), which tends to 1/B on the axis.
double rho_k1(double shape_b, double rho) {
    const double arg = shape_b * rho;
    if (arg < 1e-9) return 1.0 / shape_b;
    if (arg > 700.0) return 0.0;
    return rho * std::cyl_bessel_k(1.0, arg);
}

}  // namespace

double image_model(ImageMode mode, double n0, double shape_b, double shape_g, double u, double y) {
    const double sag = std::exp(-shape_g * y);
    switch (mode) {
        case ImageMode::ColumnAlongZ:
            // integral over z of exp(-B sqrt(rho^2 + 4 z^2)) = rho K1(B rho)
            return n0 * rho_k1(shape_b, std::hypot(u, y)) * sag;
        case ImageMode::ColumnAlongX:
            // integral over x of exp(-B sqrt(x^2 + rho^2)) = 2 rho K1(B rho), rho^2 = y^2 + 4 z^2
            return 2.0 * n0 * rho_k1(shape_b, std::sqrt(y * y + 4.0 * u * u)) * sag;
        case ImageMode::SliceZ0:
            return n0 * std::exp(-shape_b * std::hypot(u, y)) * sag;
    }
    return 0.0;
}

FitResult fit_density_image(const DensityImage& img, const QuadrupoleField& field, const SpeciesData& species,
                            const numerics::LevMarOptions& opts) {
    img.validate();
    if (!(field.gradient > 0.0)) throw InvalidInput("field gradient must be positive");

    // Vertical profile P(y): summing over u leaves P(y) / P(-y) = exp(-2 G y) exactly.
    std::vector<double> profile(static_cast<std::size_t>(img.rows), 0.0);
    double peak = 0.0;
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            profile[static_cast<std::size_t>(r)] += img.at(r, c);
            peak = std::max(peak, img.at(r, c));
        }
    }
    if (!(peak > 0.0)) throw InvalidInput("image is empty");

    double num = 0.0, den = 0.0;
    for (int r = 0; r < img.rows; ++r) {
        const double y = img.y(r);
        if (!(y > 0.0)) continue;
        const double mirror = (-y - img.y_origin) / img.pitch;
        const int rm = static_cast<int>(std::lround(mirror));
        if (rm < 0 || rm >= img.rows || std::abs(mirror - rm) > 0.25) continue;
        const double up = profile[static_cast<std::size_t>(r)];
        const double down = profile[static_cast<std::size_t>(rm)];
        if (!(up > 0.0) || !(down > 0.0)) continue;
        const double w = std::sqrt(up * down);
        num += w * (-2.0 * y) * std::log(up / down);
        den += w * 4.0 * y * y;
    }
    const double g_guess = den > 0.0 ? std::max(0.0, num / den) : 0.0;

    // B from the mean |y| of the de-sagged profile: 3/(2B) for projections, 4/(pi B) for the slice.
    double sum_w = 0.0, sum_wy = 0.0;
    for (int r = 0; r < img.rows; ++r) {
        const double w = profile[static_cast<std::size_t>(r)] * std::exp(g_guess * img.y(r));
        sum_w += w;
        sum_wy += w * std::abs(img.y(r));
    }
    const double mean_abs_y = sum_wy / sum_w;
    const double moment_factor = img.mode == ImageMode::SliceZ0 ? 4.0 / std::numbers::pi : 1.5;
    const double b_guess = moment_factor / std::max(mean_abs_y, img.pitch);
    double n0_guess = peak;
    if (img.mode == ImageMode::ColumnAlongZ) n0_guess = peak * b_guess;
    if (img.mode == ImageMode::ColumnAlongX) n0_guess = 0.5 * peak * b_guess;

    auto residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd res(static_cast<Eigen::Index>(img.values.size()));
        Eigen::Index k = 0;
        for (int r = 0; r < img.rows; ++r) {
            for (int c = 0; c < img.cols; ++c) {
                res[k++] = image_model(img.mode, p[0], p[1], p[2], img.u(c), img.y(r)) - img.at(r, c);
            }
        }
        return res;
    };
    Eigen::VectorXd p0(3);
    p0 << n0_guess, b_guess, g_guess;
    Eigen::VectorXd scale(3);
    scale << n0_guess, b_guess, b_guess;
    Eigen::VectorXd lower(3);
    lower << 0.0, 1e-6 * b_guess, -std::numeric_limits<double>::infinity();
    const auto lm = numerics::levenberg_marquardt(residuals, p0, scale, opts, lower);
    FitResult fit = from_levmar(lm, {{"n0", 0, 0, "1/m^3"}, {"shape_b", 0, 0, "1/m"}, {"shape_g", 0, 0, "1/m"}});
    require_converged(fit, "density-image");

    const double b = fit.value("shape_b");
    const double g = fit.value("shape_g");
    if (!(g > 0.0)) {
        throw GravityAxisMisidentified("fitted gravity parameter G <= 0: the vertical image axis is not along gravity");
    }
    const double mg = species.mass * PC::g_accel;
    const double temperature = mg / (PC::k_B * g);
    const double mu_bar = 2.0 * mg * b / (field.gradient * g);
    Eigen::VectorXd grad_t(3), grad_mu(3);
    grad_t << 0.0, 0.0, -temperature / g;
    grad_mu << 0.0, mu_bar / b, -mu_bar / g;
    fit.derived.push_back({"temperature", temperature, propagate(fit.covariance, grad_t), "K"});
    fit.derived.push_back({"mu_bar", mu_bar, propagate(fit.covariance, grad_mu), "J/T"});
    const double m_d = mu_bar / (species.lande_g_d * PC::mu_B);
    fit.derived.push_back({"mean_m_d", m_d, propagate(fit.covariance, grad_mu) / (species.lande_g_d * PC::mu_B), "1"});
    if (m_d < 1.0 - 1e-6 || m_d > 4.0 + 1e-6) {
        fit.notes.push_back("mean magnetic moment outside [g_d mu_B, 4 g_d mu_B]");
    }

    // Coverage: at least two 1/e radii from the centre on each side of each axis.
    const double u_radius = img.mode == ImageMode::ColumnAlongX ? 0.5 / b : 1.0 / b;
    const double u_reach = std::min(-img.u(0), img.u(img.cols - 1));
    const double y_reach = std::min(-img.y(0), img.y(img.rows - 1));
    if (u_reach < 2.0 * u_radius || y_reach < 2.0 / b) {
        fit.low_confidence = true;
        fit.notes.push_back("image covers fewer than two 1/e radii on some axis");
    }
    return fit;
}

// ---------------------------------------------------------------- two-body loss

namespace {

struct DecaySetup {
    std::vector<double> times;
    double v0;
    double alpha;
};

// n(t) through the sample times for a trial beta; negative beta is allowed here
// because finite-difference probes straddle the bound.
std::vector<double> decay_model(const DecaySetup& s, double n_init, double beta, double t0) {
    const double inv_t0 = std::isinf(t0) ? 0.0 : 1.0 / t0;
    const double t_first = s.times.front();
    numerics::OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dydt) {
        const double v = s.v0 * (1.0 + s.alpha * t);
        dydt[0] = -y[0] * inv_t0 - beta * y[0] * y[0] - y[0] * s.v0 * s.alpha / v;
    };
    numerics::OdeOptions o;
    o.rel_tol = 1e-11;
    numerics::DormandPrince solver(o);
    const auto states = solver.solve(rhs, t_first, {n_init}, s.times);
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) out[i] = states[i][0];
    return out;
}

struct BetaFit {
    LevMarResult lm;
    double q_scale;  // beta = q / q_scale
    double n_ref;
};

BetaFit fit_beta_once(const SampleSeries& density, const DecaySetup& setup, double t0,
                      const TwoBodyFitOptions& opts) {
    const double n_ref = density.y.front();
    const double span = density.x.back() - density.x.front();
    const double q_scale = n_ref * span;

    // Initial beta from the early logarithmic slope less the known loss channels.
    const double dt = density.x[1] - density.x[0];
    const double rate = -std::log(density.y[1] / density.y[0]) / dt;
    const double t_mid = 0.5 * (density.x[0] + density.x[1]);
    const double known = (std::isinf(t0) ? 0.0 : 1.0 / t0) + setup.alpha / (1.0 + setup.alpha * t_mid);
    const double n_mid = std::sqrt(density.y[0] * density.y[1]);
    const double beta_guess = std::max(0.0, (rate - known) / n_mid);

    const bool free_amp = !opts.fix_initial_density;
    auto residuals = [&](const Eigen::VectorXd& p) {
        const double beta = p[0] / q_scale;
        const double amp = free_amp ? p[1] : 1.0;
        const auto model = decay_model(setup, amp * n_ref, beta, t0);
        Eigen::VectorXd r(static_cast<Eigen::Index>(model.size()));
        for (std::size_t i = 0; i < model.size(); ++i) {
            double ri = (model[i] - density.y[i]) / n_ref;
            if (density.weighted()) ri *= n_ref / density.uncertainty[i];
            r[static_cast<Eigen::Index>(i)] = ri;
        }
        return r;
    };
    const Eigen::Index np = free_amp ? 2 : 1;
    Eigen::VectorXd p0(np), scale(np), lower(np);
    p0[0] = beta_guess * q_scale;
    scale[0] = 1.0;
    lower[0] = 0.0;
    if (free_amp) {
        p0[1] = 1.0;
        scale[1] = 1.0;
        lower[1] = 1e-6;
    }
    auto lm = numerics::levenberg_marquardt(residuals, p0, scale, opts.levmar, lower);
    return {std::move(lm), q_scale, n_ref};
}

}  // namespace

FitResult fit_two_body_loss(const SampleSeries& density, double t0, const SampleSeries& volume,
                            const TwoBodyFitOptions& opts) {
    density.validate(true);
    volume.validate(true);
    if (density.size() < 3) throw InvalidInput("two-body fit needs at least 3 density samples");
    if (!(t0 > 0.0)) throw InvalidInput("background lifetime t0 must be positive");
    for (double n : density.y) {
        if (!(n > 0.0)) throw InvalidInput("densities must be positive");
    }

    const FitResult vfit = fit_linear(volume);
    const double v0 = vfit.value("intercept");
    if (!(v0 > 0.0)) throw InvalidInput("volume fit gives a nonpositive V(0)");
    const double alpha = vfit.value("slope") / v0;
    if (alpha < 0.0) throw InvalidInput("volume fit gives a shrinking trap");
    const DecaySetup setup{density.x, v0, alpha};

    const BetaFit main = fit_beta_once(density, setup, t0, opts);
    const double q_scale = main.q_scale;
    FitResult fit;
    fit.parameters.push_back({"beta", main.lm.params[0] / q_scale, main.lm.std_errors[0] / q_scale, "m^3/s"});
    if (!opts.fix_initial_density) {
        fit.parameters.push_back({"initial_density", main.lm.params[1] * main.n_ref,
                                  main.lm.std_errors[1] * main.n_ref, "1/m^3"});
    }
    fit.covariance = main.lm.covariance;
    fit.residual_norm = main.lm.residual_norm * main.n_ref;
    fit.converged = main.lm.converged;
    fit.iterations = main.lm.iterations;
    fit.notes.push_back(main.lm.message);
    if (main.lm.hit_bound) fit.notes.push_back("negative beta iterate clamped to 0");
    if (!fit.converged) fit.notes.push_back(main.lm.message);
    require_converged(fit, "two-body");

    fit.derived.push_back({"V0", v0, vfit.error("intercept"), "m^3"});
    fit.derived.push_back({"alpha", alpha, vfit.error("slope") / v0, "1/s"});

    if (opts.sensitivity_check && std::isfinite(t0)) {
        const double beta = fit.value("beta");
        double worst = 0.0;
        for (double factor : {0.5, 1.5}) {
            const BetaFit alt = fit_beta_once(density, setup, t0 * factor, opts);
            const double b_alt = alt.lm.params[0] / alt.q_scale;
            fit.derived.push_back({factor < 1.0 ? "beta_t0_half" : "beta_t0_x1.5", b_alt, alt.lm.std_errors[0] / alt.q_scale, "m^3/s"});
            if (beta > 0.0) worst = std::max(worst, std::abs(b_alt - beta) / beta);
        }
        fit.derived.push_back({"t0_sensitivity", worst, 0.0, "1"});
    }
    return fit;
}

}  // namespace mtload
