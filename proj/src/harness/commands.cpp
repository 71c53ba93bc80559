#include "mtload/harness/commands.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "mtload/collisions.hpp"
#include "mtload/dynamics.hpp"
#include "mtload/estimation.hpp"
#include "mtload/mc_transfer.hpp"
#include "mtload/random.hpp"

namespace mtload::harness {

using PC = PhysConstants;

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what, key);
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

ResultTable start_table(const std::string& command, const Scenario& sc) {
    ResultTable t;
    t.provenance.push_back("mtload " + std::string(kToolVersion));
    t.provenance.push_back("command: " + command);
    t.provenance.push_back("scenario_hash: " + hex64(sc.hash()));
    t.provenance.push_back("seed: " + std::to_string(sc.integer("noise.seed")));
    for (const auto& line : sc.canonical_lines()) t.provenance.push_back("scenario: " + line);
    return t;
}

std::uint64_t seed_of(const Scenario& sc) { return static_cast<std::uint64_t>(sc.integer("noise.seed")); }

// Multiplicative Gaussian noise, value * (1 + sigma * N(0, 1)).
class Noise {
public:
    Noise(const Scenario& sc, std::string_view stream, std::uint64_t index = 0)
        : sigma_(sc.number("noise.relative_sigma")), rng_(make_stream(seed_of(sc), stream, index)) {}
    double operator()(double value) {
        if (sigma_ == 0.0) return value;
        return value * (1.0 + sigma_ * unit_(rng_));
    }

private:
    double sigma_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> unit_{0.0, 1.0};
};

struct SweepPoint {
    double value;  // as configured
    double si;     // converted to SI for output
    Scenario scenario;
};

struct Sweep {
    std::string key;
    Column column;
    std::vector<SweepPoint> points;
};

// Expands sweep.parameter / sweep.values, falling back to the command's default axis.
std::optional<Sweep> expand_sweep(const Scenario& sc, const std::string& default_key,
                                  const std::vector<double>& default_values) {
    std::string key = sc.text("sweep.parameter");
    std::vector<double> values = sc.list("sweep.values");
    if (key.empty()) {
        if (!values.empty()) throw ConfigError("sweep.values given without sweep.parameter", "sweep.parameter");
        if (default_key.empty()) return std::nullopt;
        key = default_key;
        values = default_values;
    }
    const KeySpec* entry = nullptr;
    try {
        entry = &key_spec(key);
    } catch (const ConfigError&) {
        throw ConfigError("sweep.parameter: unknown scenario key '" + key + "'", "sweep.parameter");
    }
    require(entry->kind == KeyKind::Number || entry->kind == KeyKind::Integer, "sweep.parameter",
            "'" + key + "' is not a numeric key");
    require(!key.starts_with("sweep.") && key != "noise.seed", "sweep.parameter", "cannot sweep '" + key + "'");
    require(!values.empty(), "sweep.values", "empty sweep");
    Sweep sw;
    sw.key = key;
    sw.column = {std::string(entry->column), std::string(entry->si_unit)};
    for (double v : values) {
        Scenario point = sc;
        point.set(key, format_number(v));
        const World w = build_world(point);
        sw.points.push_back({v, point.si(key, w.species), std::move(point)});
    }
    return sw;
}

double total_decay_rate(const World& w, double p_e, double* n_e_out = nullptr, double* v_out = nullptr,
                        double* volume_out = nullptr) {
    const CloudState cloud = make_cloud(w.mt_atom_number, w.mt_temperature, w.mu_bar, w.field, w.species);
    const double n_e = excited_mot_density(w.mot.atom_number, p_e, cloud.effective_volume);
    const double v = mean_collision_velocity(w.mot.temperature, w.mt_temperature, w.species);
    double factor = 1.0;
    if (w.apply_overlap) {
        const double ratio = w.mot.size_sigma * cloud.shape_b;
        require(ratio > 0.0 && ratio <= 1.0, "trap.mot_sigma_um", "overlap correction needs 0 < sigma/r <= 1");
        factor = overlap_correction(ratio, cloud.shape_g / cloud.shape_b);
    }
    if (n_e_out) *n_e_out = n_e;
    if (v_out) *v_out = v;
    if (volume_out) *volume_out = cloud.effective_volume;
    return mot_on_decay_rate(n_e, factor * w.sigma_ed, v, w.background_rate);
}

PumpingDistribution pumping_for(const Scenario& sc, const World& w) {
    const std::string kind = sc.text("mc.pumping");
    if (kind == "uniform") return PumpingDistribution::uniform();
    require(kind == "mean", "mc.pumping", "expected 'mean' or 'uniform', got '" + kind + "'");
    require(w.mean_m_d >= 1.0 && w.mean_m_d <= 4.0, "cloud.mean_m_d", "must lie in [1, 4] for Monte Carlo pumping");
    // Two adjacent substates mixed to reproduce the configured mean.
    const int lo = static_cast<int>(std::floor(w.mean_m_d));
    const double frac = w.mean_m_d - lo;
    PumpingDistribution d = PumpingDistribution::point(lo);
    if (frac > 0.0) {
        d.probabilities[static_cast<std::size_t>(lo + PumpingDistribution::kMaxM)] = 1.0 - frac;
        d.probabilities[static_cast<std::size_t>(lo + 1 + PumpingDistribution::kMaxM)] = frac;
    }
    return d;
}

PotentialModel potential_for(const Scenario& sc) {
    const std::string kind = sc.text("mc.potential");
    if (kind == "isotropic") return PotentialModel::Isotropic;
    require(kind == "anisotropic", "mc.potential", "expected 'isotropic' or 'anisotropic', got '" + kind + "'");
    return PotentialModel::Anisotropic;
}

double trapped_mean_m_d(const PumpingDistribution& d) {
    double w = 0.0, m = 0.0;
    for (int k = 1; k <= PumpingDistribution::kMaxM; ++k) {
        w += d.probability(k);
        m += k * d.probability(k);
    }
    return w > 0.0 ? m / w : 0.0;
}

TransferSummary run_mc(const Scenario& sc, const World& w, const MotCloud& mot, const std::string& stream) {
    TransferConfig cfg;
    cfg.mot = mot;
    cfg.field = w.field;
    cfg.pumping = pumping_for(sc, w);
    cfg.particles = sc.integer("mc.particles");
    cfg.seed = seed_of(sc);
    cfg.stream = stream;
    cfg.potential = potential_for(sc);
    cfg.threads = static_cast<int>(sc.integer("mc.threads"));
    require(cfg.particles > 0, "mc.particles", "must be positive");
    return run_transfer_ensemble(cfg, w.species);
}

// The synthetic noise is proportional to the signal, so noisy data are fitted with
// matching weights; noiseless data take the plain fit.
FitResult fit_line(const SampleSeries& series, const Scenario& sc) {
    return sc.number("noise.relative_sigma") > 0.0 ? fit_linear_proportional(series) : fit_linear(series);
}

std::string join_row(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_number(values[i]);
    return out;
}

}  // namespace

World build_world(const Scenario& sc) {
    World w;
    require(sc.text("species.name") == "chromium52", "species.name", "only 'chromium52' is bundled");
    const double g_d = sc.number("species.lande_g_d");
    require(g_d > 0.0, "species.lande_g_d", "must be positive");
    w.species = chromium52(g_d);
    const auto& s = w.species;

    w.field.gradient = sc.si("trap.gradient_G_per_cm", s);
    require(w.field.gradient > 0.0, "trap.gradient_G_per_cm", "must be positive");
    w.light.single_beam_intensity = sc.si("trap.beam_intensity_Isat", s);
    require(w.light.single_beam_intensity >= 0.0, "trap.beam_intensity_Isat", "must be nonnegative");
    w.light.beam_count = static_cast<int>(sc.integer("trap.beam_count"));
    require(w.light.beam_count >= 1, "trap.beam_count", "must be at least 1");
    w.light.detuning = sc.si("trap.detuning_gamma", s);

    w.mot.atom_number = sc.number("trap.mot_atom_number");
    require(w.mot.atom_number >= 0.0, "trap.mot_atom_number", "must be nonnegative");
    w.mot.size_sigma = sc.si("trap.mot_sigma_um", s);
    require(w.mot.size_sigma >= 0.0, "trap.mot_sigma_um", "must be nonnegative");
    w.mot.temperature = sc.si("trap.mot_temperature_uK", s);
    require(w.mot.temperature > 0.0, "trap.mot_temperature_uK", "must be positive");

    w.mt_temperature = sc.si("cloud.temperature_uK", s);
    require(w.mt_temperature > 0.0, "cloud.temperature_uK", "must be positive");
    w.mean_m_d = sc.number("cloud.mean_m_d");
    require(w.mean_m_d > 0.0 && w.mean_m_d <= 4.0, "cloud.mean_m_d", "must lie in (0, 4]");
    w.mu_bar = s.magnetic_moment(w.mean_m_d);
    w.mt_atom_number = sc.number("cloud.atom_number");
    require(w.mt_atom_number > 0.0, "cloud.atom_number", "must be positive");

    w.efficiency = sc.number("rates.efficiency");
    require(w.efficiency >= 0.0 && w.efficiency <= 1.0, "rates.efficiency", "must lie in [0, 1]");
    w.sigma_ed = sc.number("rates.sigma_ed_m2");
    require(w.sigma_ed >= 0.0, "rates.sigma_ed_m2", "must be nonnegative");
    w.background_rate = sc.number("rates.background_rate_per_s");
    require(w.background_rate >= 0.0, "rates.background_rate_per_s", "must be nonnegative");
    w.apply_overlap = sc.flag("rates.apply_overlap_correction");

    require(sc.number("noise.relative_sigma") >= 0.0, "noise.relative_sigma", "must be nonnegative");
    require(sc.integer("noise.seed") >= 0, "noise.seed", "must be nonnegative");
    return w;
}

// ---------------------------------------------------------------- simulate-loading

ResultTable cmd_simulate_loading(const Scenario& sc) {
    build_world(sc);
    const auto sweep = expand_sweep(sc, "", {});
    const long samples = sc.integer("loading.samples");
    const double t_end = sc.number("loading.t_end_s");
    require(samples >= 2, "loading.samples", "need at least 2 samples");
    require(t_end > 0.0, "loading.t_end_s", "must be positive");

    ResultTable t = start_table("simulate-loading", sc);
    if (sweep) t.columns.push_back(sweep->column);
    t.columns.push_back({"t", "s"});
    t.columns.push_back({"N_MT", "1"});
    t.trailer.push_back("derived: point,R(1/s),Gamma(1/s),N0(1),tau(s),P_e(1),V_MT(m^3),n_e(1/m^3),v(m/s)");

    std::vector<std::pair<double, Scenario>> points;
    if (sweep) {
        for (const auto& p : sweep->points) points.emplace_back(p.si, p.scenario);
    } else {
        points.emplace_back(0.0, sc);
    }
    for (std::size_t k = 0; k < points.size(); ++k) {
        const World w = build_world(points[k].second);
        const double p_e = excitation_probability(w.light, w.species);
        const double rate = transfer_rate(w.mot.atom_number, p_e, w.species, w.efficiency);
        double n_e = 0.0, v = 0.0, volume = 0.0;
        const double gamma = total_decay_rate(w, p_e, &n_e, &v, &volume);
        Noise noise(sc, "noise.loading", k);
        for (long i = 0; i < samples; ++i) {
            const double time = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
            const double n = noise(loading_curve(rate, gamma, time));
            std::vector<double> row;
            if (sweep) row.push_back(points[k].first);
            row.push_back(time);
            row.push_back(n);
            t.add_row(std::move(row));
        }
        const double n0 = gamma > 0.0 ? steady_state_population(rate, gamma) : INFINITY;
        const double tau = gamma > 0.0 ? 1.0 / gamma : INFINITY;
        t.trailer.push_back("derived: " + join_row({static_cast<double>(k), rate, gamma, n0, tau, p_e, volume, n_e, v}));
    }
    return t;
}

// ---------------------------------------------------------------- simulate-decay

ResultTable cmd_simulate_decay(const Scenario& sc) {
    const World w = build_world(sc);
    const CloudState cloud = make_cloud(w.mt_atom_number, w.mt_temperature, w.mu_bar, w.field, w.species);
    RateModel model;
    model.background_lifetime = sc.number("decay.t0_s");
    model.two_body_coeff = sc.number("decay.beta_m3_per_s");
    model.volume.initial = cloud.effective_volume;
    model.volume.growth = sc.number("decay.volume_growth_per_s");
    require(model.background_lifetime > 0.0, "decay.t0_s", "must be positive");
    require(model.two_body_coeff >= 0.0, "decay.beta_m3_per_s", "must be nonnegative");
    require(model.volume.growth >= 0.0, "decay.volume_growth_per_s", "must be nonnegative");
    const double n_init = sc.si("decay.initial_density_per_cm3", w.species);
    require(n_init > 0.0, "decay.initial_density_per_cm3", "must be positive");
    const double t_end = sc.number("decay.t_end_s");
    const long samples = sc.integer("decay.samples");
    require(t_end > 0.0, "decay.t_end_s", "must be positive");
    require(samples >= 2, "decay.samples", "need at least 2 samples");

    const auto traj = integrate_mt_decay(n_init, model, t_end, t_end / static_cast<double>(samples - 1));
    ResultTable t = start_table("simulate-decay", sc);
    t.columns = {{"t", "s"}, {"n0", "1/m^3"}, {"N", "1"}, {"V", "m^3"}};
    Noise density_noise(sc, "noise.decay.density");
    Noise volume_noise(sc, "noise.decay.volume");
    for (const auto& s : traj) {
        const double n = density_noise(s.peak_density);
        const double v = volume_noise(s.volume);
        t.add_row({s.time, n, n * v, v});
    }
    t.trailer.push_back("derived: V0(m^3)=" + format_number(model.volume.initial) +
                        ",beta_n0(1/s)=" + format_number(model.two_body_coeff * n_init));
    return t;
}

// ---------------------------------------------------------------- simulate-image

ResultTable cmd_simulate_image(const Scenario& sc) {
    const World w = build_world(sc);
    const CloudState cloud = make_cloud(w.mt_atom_number, w.mt_temperature, w.mu_bar, w.field, w.species);
    const long pixels = sc.integer("image.pixels");
    const double half = sc.si("image.half_width_um", w.species);
    require(pixels >= 3, "image.pixels", "need at least 3 pixels per axis");
    require(half > 0.0, "image.half_width_um", "must be positive");
    const std::string mode = sc.text("image.mode");
    require(mode == "column_z" || mode == "column_x" || mode == "slice", "image.mode",
            "expected column_z, column_x or slice");

    ResultTable t = start_table("simulate-image", sc);
    const std::string u_name = mode == "column_x" ? "z" : "x";
    t.columns = {{u_name, "m"}, {"y", "m"}};
    t.columns.push_back(mode == "slice" ? Column{"density", "1/m^3"} : Column{"column_density", "1/m^2"});
    const double pitch = 2.0 * half / static_cast<double>(pixels - 1);
    Noise noise(sc, "noise.image");
    for (long r = 0; r < pixels; ++r) {
        const double y = -half + static_cast<double>(r) * pitch;
        for (long c = 0; c < pixels; ++c) {
            const double u = -half + static_cast<double>(c) * pitch;
            double value = 0.0;
            if (mode == "slice") value = density_at({u, y, 0.0}, cloud);
            else value = column_density(cloud, mode == "column_x" ? ProjectionAxis::X : ProjectionAxis::Z, u, y);
            t.add_row({u, y, noise(value)});
        }
    }
    t.trailer.push_back("derived: n0(1/m^3)=" + format_number(cloud.peak_density) +
                        ",shape_b(1/m)=" + format_number(cloud.shape_b) + ",shape_g(1/m)=" + format_number(cloud.shape_g) +
                        ",T(K)=" + format_number(cloud.temperature) + ",mu_bar(J/T)=" + format_number(cloud.mean_magnetic_moment));
    return t;
}

// ---------------------------------------------------------------- figure 2

ResultTable cmd_figure2(const Scenario& sc) {
    build_world(sc);
    const auto detunings = sc.list("figure2.detunings_gamma");
    const auto efficiencies = sc.list("figure2.efficiencies");
    require(!detunings.empty(), "figure2.detunings_gamma", "empty list");
    require(efficiencies.size() == detunings.size(), "figure2.efficiencies", "needs one entry per detuning");
    for (double e : efficiencies) require(e >= 0.0 && e <= 1.0, "figure2.efficiencies", "entries must lie in [0, 1]");
    std::vector<double> default_n;
    for (int i = 1; i <= 10; ++i) default_n.push_back(2e6 * i);
    const auto sweep = *expand_sweep(sc, "trap.mot_atom_number", default_n);
    require(sweep.key == "trap.mot_atom_number", "sweep.parameter", "figure2 sweeps trap.mot_atom_number");

    ResultTable t = start_table("figure2", sc);
    t.columns = {{"detuning", "rad/s"}, {"N_MOT", "1"}, {"R", "1/s"}};
    t.trailer.push_back("fit: detuning(rad/s),P_e(1),slope(1/s),slope_se(1/s),intercept(1/s),relative_residual(1),eta(1),eta_se(1)");
    for (std::size_t d = 0; d < detunings.size(); ++d) {
        Noise noise(sc, "noise.figure2", d);
        SampleSeries series;
        double p_e = 0.0, detuning = 0.0;
        for (const auto& point : sweep.points) {
            Scenario ps = point.scenario;
            ps.set("trap.detuning_gamma", format_number(detunings[d]));
            ps.set("rates.efficiency", format_number(efficiencies[d]));
            const World w = build_world(ps);
            p_e = excitation_probability(w.light, w.species);
            detuning = w.light.detuning;
            const double rate = noise(transfer_rate(w.mot.atom_number, p_e, w.species, w.efficiency));
            t.add_row({detuning, w.mot.atom_number, rate});
            series.x.push_back(w.mot.atom_number);
            series.y.push_back(rate);
        }
        const FitResult fit = fit_line(series, sc);
        double ynorm = 0.0;
        for (double y : series.y) ynorm += y * y;
        const auto species = build_world(sc).species;
        const double eta = efficiency_from_rate(fit.value("slope"), 1.0, p_e, species);
        const double eta_se = efficiency_from_rate(fit.error("slope"), 1.0, p_e, species);
        t.trailer.push_back("fit: " + join_row({detuning, p_e, fit.value("slope"), fit.error("slope"), fit.value("intercept"),
                                                fit.residual_norm / std::sqrt(ynorm), eta, eta_se}));
    }
    return t;
}

// ---------------------------------------------------------------- figure 3

ResultTable cmd_figure3(const Scenario& sc) {
    build_world(sc);
    const auto detunings = sc.list("figure3.detunings_gamma");
    require(!detunings.empty(), "figure3.detunings_gamma", "empty list");
    const auto sweep = *expand_sweep(sc, "trap.mot_atom_number", {2e6, 8e6, 1.4e7, 2e7});

    ResultTable t = start_table("figure3", sc);
    t.columns = {{"detuning", "rad/s"}, {sweep.column.name, sweep.column.unit}, {"ne_v", "1/(m^2 s)"}, {"Gamma", "1/s"}};
    Noise noise(sc, "noise.figure3");
    SampleSeries series;
    for (double d : detunings) {
        for (const auto& point : sweep.points) {
            Scenario ps = point.scenario;
            ps.set("trap.detuning_gamma", format_number(d));
            const World w = build_world(ps);
            const double p_e = excitation_probability(w.light, w.species);
            double n_e = 0.0, v = 0.0;
            const double gamma = noise(total_decay_rate(w, p_e, &n_e, &v));
            t.add_row({w.light.detuning, point.si, n_e * v, gamma});
            series.x.push_back(n_e * v);
            series.y.push_back(gamma);
        }
    }
    const FitResult fit = fit_line(series, sc);
    double ynorm = 0.0;
    for (double y : series.y) ynorm += y * y;
    t.trailer.push_back("fit: sigma_ed(m^2),sigma_ed_se(m^2),intercept(1/s),intercept_se(1/s),relative_residual(1)");
    t.trailer.push_back("fit: " + join_row({fit.value("slope"), fit.error("slope"), fit.value("intercept"),
                                            fit.error("intercept"), fit.residual_norm / std::sqrt(ynorm)}));
    return t;
}

// ---------------------------------------------------------------- figure 4

ResultTable cmd_figure4(const Scenario& sc) {
    build_world(sc);
    std::vector<double> default_x;
    for (int i = 1; i <= 10; ++i) default_x.push_back(5.0 * i);
    const auto sweep = *expand_sweep(sc, "figure4.light_shift", default_x);
    require(sweep.key == "figure4.light_shift", "sweep.parameter", "figure4 sweeps figure4.light_shift");

    ResultTable t = start_table("figure4", sc);
    t.columns = {{"light_shift", "1"}, {"T_MOT", "K"}, {"T_MT_th", "K"}, {"T_MT_mc", "K"}};
    SampleSeries mot_line, th_line;
    double worst = 0.0;
    for (std::size_t k = 0; k < sweep.points.size(); ++k) {
        const Scenario& ps = sweep.points[k].scenario;
        const World w = build_world(ps);
        const double x = sweep.points[k].value;
        MotCloud mot = w.mot;
        mot.temperature = ps.si("figure4.t_mot_offset_uK", w.species) + ps.si("figure4.t_mot_slope_uK", w.species) * x;
        require(mot.temperature > 0.0, "figure4.t_mot_offset_uK", "T_MOT must stay positive over the sweep");
        const auto pumping = pumping_for(ps, w);
        const double mu_bar = w.species.magnetic_moment(trapped_mean_m_d(pumping));
        const double t_th = predict_mt_temperature(mot, w.field, mu_bar);
        const auto mc = run_mc(ps, w, mot, "mc.figure4/" + std::to_string(k));
        t.add_row({x, mot.temperature, t_th, mc.temperature});
        mot_line.x.push_back(x);
        mot_line.y.push_back(mot.temperature);
        th_line.x.push_back(x);
        th_line.y.push_back(t_th);
        worst = std::max(worst, std::abs(mc.temperature - t_th) / t_th);
    }
    if (sweep.points.size() >= 3) {
        const auto f1 = fit_linear(mot_line);
        const auto f2 = fit_linear(th_line);
        t.trailer.push_back("fit: series,slope(K),intercept(K)");
        t.trailer.push_back("fit: T_MOT," + format_number(f1.value("slope")) + "," + format_number(f1.value("intercept")));
        t.trailer.push_back("fit: T_MT_th," + format_number(f2.value("slope")) + "," + format_number(f2.value("intercept")));
    }
    t.trailer.push_back("derived: max_relative_mc_deviation(1)=" + format_number(worst));
    return t;
}

// ---------------------------------------------------------------- mc-transfer

ResultTable cmd_mc_transfer(const Scenario& sc) {
    const World w = build_world(sc);
    const auto pumping = pumping_for(sc, w);
    const double mu_bar = w.species.magnetic_moment(trapped_mean_m_d(pumping));
    const auto mc = run_mc(sc, w, w.mot, "mc.transfer");
    ResultTable t = start_table("mc-transfer", sc);
    t.columns = {{"T_MOT", "K"},       {"sigma_MOT", "m"},    {"gradient", "T/m"},       {"mu_bar", "J/T"},
                 {"particles", "1"},   {"trapped", "1"},      {"T_MT_mc", "K"},          {"T_MT_mc_stderr", "K"},
                 {"T_MT_th", "K"},     {"mean_radius", "m"},  {"mean_radius_stderr", "m"}};
    t.add_row({w.mot.temperature, w.mot.size_sigma, w.field.gradient, mu_bar, static_cast<double>(mc.sampled),
               static_cast<double>(mc.trapped), mc.temperature, mc.temperature_stderr,
               predict_mt_temperature(w.mot, w.field, mu_bar), mc.mean_radius, mc.mean_radius_stderr});
    return t;
}

// ---------------------------------------------------------------- fit

namespace {

std::string unit_of(const std::string& header) {
    const auto open = header.find('(');
    const auto close = header.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) return "1";
    return header.substr(open + 1, close - open - 1);
}

std::string bare(const std::string& header) { return header.substr(0, header.find('(')); }

DensityImage image_from_csv(const CsvData& data, const std::string& source) {
    if (data.header.size() != 3) throw DataParseError(source, 0, "image files have exactly three columns");
    const std::string u_name = bare(data.header[0]);
    const std::string value_name = bare(data.header[2]);
    if (bare(data.header[1]) != "y") throw MissingColumn("y");
    DensityImage img;
    if (value_name == "density") {
        img.mode = ImageMode::SliceZ0;
    } else if (value_name == "column_density") {
        if (u_name == "x") img.mode = ImageMode::ColumnAlongZ;
        else if (u_name == "z") img.mode = ImageMode::ColumnAlongX;
        else throw MissingColumn("x or z");
    } else {
        throw MissingColumn("density or column_density");
    }
    std::vector<double> us, ys;
    for (const auto& row : data.rows) {
        us.push_back(row[0]);
        ys.push_back(row[1]);
    }
    auto unique_sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto u_axis = unique_sorted(us);
    const auto y_axis = unique_sorted(ys);
    if (u_axis.size() < 2 || y_axis.size() < 2) throw DataParseError(source, 0, "image needs at least 2x2 pixels");
    img.cols = static_cast<int>(u_axis.size());
    img.rows = static_cast<int>(y_axis.size());
    if (data.rows.size() != u_axis.size() * y_axis.size()) throw DataParseError(source, 0, "pixels do not form a full grid");
    img.pitch = (u_axis.back() - u_axis.front()) / (img.cols - 1);
    const double y_pitch = (y_axis.back() - y_axis.front()) / (img.rows - 1);
    if (std::abs(y_pitch - img.pitch) > 1e-6 * img.pitch) throw DataParseError(source, 0, "pixels are not square");
    img.u_origin = u_axis.front();
    img.y_origin = y_axis.front();
    img.values.assign(data.rows.size(), -1.0);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const int c = static_cast<int>(std::lround((data.rows[i][0] - img.u_origin) / img.pitch));
        const int r = static_cast<int>(std::lround((data.rows[i][1] - img.y_origin) / img.pitch));
        const std::size_t k = static_cast<std::size_t>(r) * img.cols + c;
        if (img.values[k] >= 0.0) throw DataParseError(source, 0, "duplicate pixel");
        img.values[k] = data.rows[i][2];
    }
    return img;
}

}  // namespace

FitOutcome cmd_fit(const CsvData& data, const std::string& fitter, const FitCommandOptions& opt, const Scenario& sc,
                   const std::string& source) {
    const World w = build_world(sc);
    ResultTable t = start_table("fit " + fitter, sc);
    t.provenance.insert(t.provenance.begin() + 2, "input: " + source);
    FitResult fit;
    std::string residual_unit = "1";
    FitOutcome outcome;
    try {
        if (fitter == "loading") {
            const auto ti = data.column_index("t");
            const auto ni = data.column_index("N_MT");
            SampleSeries s{data.column(ti), data.column(ni), {}};
            residual_unit = unit_of(data.header[ni]);
            fit = fit_loading_curve(s);
        } else if (fitter == "linear") {
            if (data.header.size() < 2 && (opt.x_column.empty() || opt.y_column.empty())) throw MissingColumn("y");
            const auto xi = opt.x_column.empty() ? 0 : data.column_index(opt.x_column);
            const auto yi = opt.y_column.empty() ? 1 : data.column_index(opt.y_column);
            SampleSeries s{data.column(xi), data.column(yi), {}};
            if (!opt.sigma_column.empty()) s.uncertainty = data.column(opt.sigma_column);
            residual_unit = unit_of(data.header[yi]);
            fit = opt.proportional ? fit_linear_proportional(s) : fit_linear(s);
            const std::string xu = unit_of(data.header[xi]);
            const std::string yu = unit_of(data.header[yi]);
            fit.parameters[0].unit = yu == "1" ? "1/(" + xu + ")" : "(" + yu + ")/(" + xu + ")";
            fit.parameters[1].unit = yu;
        } else if (fitter == "image") {
            const auto img = image_from_csv(data, source);
            residual_unit = unit_of(data.header[2]);
            fit = fit_density_image(img, w.field, w.species);
        } else if (fitter == "two-body") {
            const auto time = data.column("t");
            SampleSeries density{time, data.column("n0"), {}};
            SampleSeries volume{time, data.column("V"), {}};
            const double t0 = opt.t0.value_or(sc.number("decay.t0_s"));
            fit = fit_two_body_loss(density, t0, volume);
            residual_unit = "1/m^3";
        } else {
            throw ConfigError("unknown fitter '" + fitter + "' (expected loading, linear, image or two-body)", "fitter");
        }
        outcome.converged = true;
    } catch (const FitFailure& e) {
        fit = e.best_iterate;
        outcome.converged = false;
        outcome.message = e.what();
    }

    for (const auto& group : {&fit.parameters, &fit.derived}) {
        for (const auto& p : *group) {
            const std::string unit = p.unit.empty() ? "1" : p.unit;
            t.columns.push_back({p.name, unit});
            t.columns.push_back({p.name + "_se", unit});
        }
    }
    t.columns.push_back({"residual_norm", residual_unit});
    t.columns.push_back({"iterations", "1"});
    t.columns.push_back({"converged", "1"});
    t.columns.push_back({"low_confidence", "1"});
    std::vector<double> row;
    for (const auto& group : {&fit.parameters, &fit.derived}) {
        for (const auto& p : *group) {
            row.push_back(p.value);
            row.push_back(p.std_error);
        }
    }
    row.push_back(fit.residual_norm);
    row.push_back(fit.iterations);
    row.push_back(outcome.converged ? 1.0 : 0.0);
    row.push_back(fit.low_confidence ? 1.0 : 0.0);
    t.add_row(std::move(row));
    for (const auto& note : fit.notes) t.trailer.push_back("note: " + note);
    if (!outcome.converged) t.trailer.push_back("error: " + outcome.message);
    outcome.table = std::move(t);
    return outcome;
}

ResultTable run_command(const std::string& name, const Scenario& sc) {
    if (name == "simulate-loading") return cmd_simulate_loading(sc);
    if (name == "simulate-decay") return cmd_simulate_decay(sc);
    if (name == "simulate-image") return cmd_simulate_image(sc);
    if (name == "figure2") return cmd_figure2(sc);
    if (name == "figure3") return cmd_figure3(sc);
    if (name == "figure4") return cmd_figure4(sc);
    if (name == "mc-transfer") return cmd_mc_transfer(sc);
    throw ConfigError("unknown command '" + name + "'", "command");
}

}  // namespace mtload::harness
