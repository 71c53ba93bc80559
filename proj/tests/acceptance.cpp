// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtload/cloud.hpp"
#include "mtload/collisions.hpp"
#include "mtload/dynamics.hpp"
#include "mtload/estimation.hpp"
#include "mtload/mc_transfer.hpp"
#include "mtload/random.hpp"
#include "mtload/harness/cli.hpp"
#include "mtload/harness/commands.hpp"

using namespace mtload;
using namespace mtload::harness;
using PC = PhysConstants;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Numeric rows of the "fit: " trailer lines (the first such line is a header).
std::vector<std::vector<double>> fit_rows(const ResultTable& t) {
    std::vector<std::vector<double>> rows;
    bool header = true;
    for (const auto& line : t.trailer) {
        if (!line.starts_with("fit: ")) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line.substr(5));
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                row.push_back(NAN);
            }
        }
        rows.push_back(row);
    }
    return rows;
}

Outcome headline_steady_state() {
    const double n0 = steady_state_population(1e8, 1.0);
    const double n3 = loading_curve(1e8, 1.0, 3.0);
    const double expected = 1e8 * (1.0 - std::exp(-3.0));
    const bool ok = rel(n0, 1e8) < 1e-9 && n3 >= 0.95 * n0 && rel(n3, expected) < 1e-9;
    return {ok, fmt("N0=%.10g, N(3 s)/N0=%.6f", n0, n3 / n0)};
}

Outcome phase_space_density_bound() {
    const double psd = phase_space_density(1e16, 50e-6, chromium52());
    return {psd >= 3.5e-7 && psd <= 4.5e-7 && psd > 1e-7, fmt("psd=%.4g", psd)};
}

Outcome virial_oracle() {
    const auto cr = chromium52();
    double worst = 0.0;
    bool point_ok = true;
    std::string point_detail;
    for (double sigma : {0.0, 100e-6, 200e-6}) {
        for (double b : {0.1, 0.2}) {
            for (int m : {3, 4}) {
                TransferConfig cfg;
                cfg.mot = {sigma, 300e-6, 1e7};
                cfg.field = {b};
                cfg.pumping = PumpingDistribution::point(m);
                cfg.particles = 100000;
                const auto s = run_transfer_ensemble(cfg, cr);
                const double th = predict_mt_temperature(cfg.mot, cfg.field, cr.magnetic_moment(m));
                worst = std::max(worst, rel(s.temperature, th));
                if (sigma == 0.0) {
                    const double dev = std::abs(s.temperature - 100e-6);
                    point_ok = point_ok && dev < 3.0 * s.temperature_stderr;
                }
            }
        }
    }
    return {worst < 0.02 && point_ok, fmt("max relative deviation %.4f over 12 cases; point transfer at T_MOT/3: %s",
                                          worst, point_ok ? "yes" : "no")};
}

Outcome prefactor_and_radius() {
    const double lhs = 8.0 / (9.0 * std::sqrt(2.0 * std::numbers::pi));
    const double rhs = 2.0 / 9.0 * std::sqrt(8.0 / std::numbers::pi);
    const auto cr = chromium52();
    const MotCloud mot{200e-6, 300e-6, 1e7};
    const double offset = virial_temperature_offset(mot, {0.2}, cr.magnetic_moment(4.0));
    const double direct = rhs * 6.0 * PC::mu_B * 0.2 * 200e-6 / PC::k_B;
    TransferConfig cfg;
    cfg.mot = mot;
    cfg.field = {0.2};
    const auto s = run_transfer_ensemble(cfg, cr);
    const double expected_r = std::sqrt(8.0 / std::numbers::pi) * 200e-6;
    const double z = std::abs(s.mean_radius - expected_r) / s.mean_radius_stderr;
    const bool ok = std::abs(lhs - rhs) < 1e-12 && rel(offset, direct) < 1e-12 && z < 3.0;
    return {ok, fmt("|identity| diff %.2e, <|r|> off by %.2f standard errors", std::abs(lhs - rhs), z)};
}

Outcome decay_integrator() {
    double worst = 0.0;
    RateModel exp_model;
    exp_model.background_lifetime = 60.0;
    exp_model.volume.initial = 1.9e-9;
    for (const auto& s : integrate_mt_decay(1e16, exp_model, 180.0, 5.0))
        worst = std::max(worst, rel(s.peak_density, 1e16 * std::exp(-s.time / 60.0)));
    RateModel two_body;
    two_body.two_body_coeff = 7e-17;
    two_body.volume.initial = 1.9e-9;
    const double t_char = 1.0 / (7e-17 * 1e16);
    for (const auto& s : integrate_mt_decay(1e16, two_body, 3.0 * t_char, t_char / 20.0))
        worst = std::max(worst, rel(s.peak_density, 1e16 / (1.0 + 0.7 * s.time)));
    RateModel dilution;
    dilution.volume.initial = 1.9e-9;
    dilution.volume.growth = 0.1;
    double drift = 0.0;
    const auto traj = integrate_mt_decay(1e16, dilution, 30.0, 0.5);
    for (const auto& s : traj) drift = std::max(drift, rel(s.atom_number, traj.front().atom_number));
    return {worst < 1e-6 && drift < 1e-9, fmt("closed-form deviation %.2e, atom-number drift %.2e", worst, drift)};
}

void add_noise(std::vector<double>& v, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (double& x : v) x *= 1.0 + sigma * n(rng);
}

Outcome fit_round_trips() {
    const auto cr = chromium52();
    // (a) loading curve
    int good_a = 0;
    for (int k = 0; k < 200; ++k) {
        SampleSeries s;
        for (int i = 0; i < 30; ++i) {
            s.x.push_back(5.0 * i / 29.0);
            s.y.push_back(loading_curve(1e8, 1.0, s.x.back()));
        }
        auto rng = make_stream(2024, "acceptance.loading", k);
        add_noise(s.y, 0.03, rng);
        const auto fit = fit_loading_curve(s);
        if (rel(fit.value("N0"), 1e8) < 0.05 && rel(fit.value("tau"), 1.0) < 0.05) ++good_a;
    }
    // (b) density image
    int good_b = 0;
    const int image_trials = 20;
    const QuadrupoleField field{0.1};
    const double mu = 5.25 * PC::mu_B;
    const auto cloud = make_cloud(1e8, 100e-6, mu, field, cr);
    DensityImage clean;
    clean.cols = clean.rows = 64;
    clean.pitch = 4e-3 / 63.0;
    clean.u_origin = clean.y_origin = -2e-3;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) clean.values.push_back(column_density(cloud, ProjectionAxis::Z, clean.u(c), clean.y(r)));
    double worst_t = 0.0;
    for (int k = 0; k < image_trials; ++k) {
        auto img = clean;
        auto rng = make_stream(2024, "acceptance.image", k);
        add_noise(img.values, 0.05, rng);
        const auto fit = fit_density_image(img, field, cr);
        const double m = fit.value("mu_bar") / PC::mu_B;
        const double dt = rel(fit.value("temperature"), 100e-6);
        worst_t = std::max(worst_t, dt);
        if (dt < 0.10 && m >= 4.5 && m <= 6.0) ++good_b;
    }
    // (c) loss-rate pipeline at 10% noise
    int good_c = 0;
    const int rate_trials = 200;
    for (int k = 0; k < rate_trials; ++k) {
        Scenario sc;
        sc.set("noise.relative_sigma", "0.1");
        sc.set("noise.seed", std::to_string(1000 + k));
        const auto rows = fit_rows(cmd_figure3(sc));
        if (!rows.empty() && rel(rows[0][0], 1e-15) < 0.15) ++good_c;
    }
    // (d) two-body coefficient
    RateModel m;
    m.background_lifetime = 60.0;
    m.two_body_coeff = 7e-17;
    m.volume.initial = make_cloud(1e8, 100e-6, 6 * PC::mu_B, field, cr).effective_volume;
    m.volume.growth = 0.1;
    SampleSeries dens, vol;
    for (const auto& s : integrate_mt_decay(1e16, m, 5.0, 0.2)) {
        dens.x.push_back(s.time);
        dens.y.push_back(s.peak_density);
        vol.x.push_back(s.time);
        vol.y.push_back(s.volume);
    }
    const auto tb = fit_two_body_loss(dens, 60.0, vol);
    const double beta_err = rel(tb.value("beta"), 7e-17);
    const double sens = tb.value("t0_sensitivity");

    const bool ok = good_a >= 190 && good_b >= 19 && good_c >= 190 && beta_err < 1e-4 && sens < 0.15;
    return {ok, fmt("(a) %d/200 (b) %d/%d, worst T error %.3f (c) %d/%d (d) beta error %.1e, t0 sensitivity %.3f",
                    good_a, good_b, image_trials, worst_t, good_c, rate_trials, beta_err, sens)};
}

Outcome effective_volume_and_overlap() {
    double worst = 0.0;
    for (double b : {500.0, 2000.0, 8000.0})
        worst = std::max(worst, rel(effective_volume(b, 0.0), 4.0 * std::numbers::pi / (b * b * b)));
    const double f = overlap_correction(0.25);
    return {worst < 1e-4 && f >= 0.5 && f <= 0.8, fmt("volume deviation %.2e, f(0.25)=%.4f", worst, f)};
}

Outcome efficiency_ordering() {
    bool ok = true;
    std::string detail;
    for (const char* noise : {"0", "0.05"}) {
        Scenario sc;
        sc.set("noise.relative_sigma", noise);
        const auto rows = fit_rows(cmd_figure2(sc));
        if (rows.size() != 3) return {false, "expected three detunings"};
        std::vector<double> eta;
        for (const auto& r : rows) eta.push_back(r[6]);
        for (double e : eta) ok = ok && e >= 0.0 && e <= 1.0;
        ok = ok && eta[0] > eta[1] && eta[1] > eta[2];
        detail += fmt("%snoise %s: eta = %.3f, %.3f, %.3f", detail.empty() ? "" : "; ", noise, eta[0], eta[1], eta[2]);
    }
    return {ok, detail};
}

Outcome cli_determinism() {
    const std::vector<std::string> commands{"simulate-loading", "simulate-decay", "simulate-image", "figure2",
                                            "figure3",          "figure4",        "mc-transfer"};
    int identical = 0;
    for (const auto& c : commands) {
        const std::vector<std::string> args{c, "--seed", "5", "--set", "noise.relative_sigma=0.02",
                                            "--set", "mc.particles=20000", "--set", "image.pixels=24"};
        std::ostringstream a, b, err;
        const int ra = run_cli(args, a, err);
        const int rb = run_cli(args, b, err);
        if (ra == 0 && rb == 0 && a.str() == b.str() && !a.str().empty()) ++identical;
    }
    // thread count must not change Monte Carlo output
    std::ostringstream one, four, err;
    run_cli({"mc-transfer", "--set", "mc.threads=1"}, one, err);
    run_cli({"mc-transfer", "--set", "mc.threads=4"}, four, err);
    auto strip = [](const std::string& s) {
        std::string out;
        std::istringstream in(s);
        for (std::string line; std::getline(in, line);)
            if (!line.starts_with("#")) out += line + "\n";
        return out;
    };
    const bool threads_ok = strip(one.str()) == strip(four.str()) && !strip(one.str()).empty();
    return {identical == static_cast<int>(commands.size()) && threads_ok,
            fmt("%d/%zu commands byte-identical; thread-count invariant: %s", identical, commands.size(),
                threads_ok ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"headline steady state", headline_steady_state},
        {"phase-space density", phase_space_density_bound},
        {"virial temperature oracle", virial_oracle},
        {"potential-energy prefactor and mean radius", prefactor_and_radius},
        {"decay integrator", decay_integrator},
        {"fit round trips", fit_round_trips},
        {"effective volume and overlap", effective_volume_and_overlap},
        {"efficiency ordering", efficiency_ordering},
        {"determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
