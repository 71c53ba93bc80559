#include <doctest.h>

#include <cmath>
#include <random>

#include "mtload/dynamics.hpp"
#include "mtload/estimation.hpp"
#include "mtload/random.hpp"

using namespace mtload;

namespace {

SampleSeries loading_series(double rate, double gamma, int samples, double t_end) {
    SampleSeries s;
    for (int i = 0; i < samples; ++i) {
        const double t = t_end * i / (samples - 1);
        s.x.push_back(t);
        s.y.push_back(loading_curve(rate, gamma, t));
    }
    return s;
}

void add_noise(std::vector<double>& v, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (double& x : v) x *= 1.0 + sigma * n(rng);
}

DensityImage make_image(const CloudState& cloud, ImageMode mode, int pixels, double half_width) {
    DensityImage img;
    img.mode = mode;
    img.cols = img.rows = pixels;
    img.pitch = 2.0 * half_width / (pixels - 1);
    img.u_origin = img.y_origin = -half_width;
    for (int r = 0; r < pixels; ++r) {
        for (int c = 0; c < pixels; ++c) {
            const double u = img.u(c), y = img.y(r);
            switch (mode) {
            case ImageMode::ColumnAlongZ: img.values.push_back(column_density(cloud, ProjectionAxis::Z, u, y)); break;
            case ImageMode::ColumnAlongX: img.values.push_back(column_density(cloud, ProjectionAxis::X, u, y)); break;
            case ImageMode::SliceZ0: img.values.push_back(density_at({u, y, 0.0}, cloud)); break;
            }
        }
    }
    return img;
}

}  // namespace

TEST_CASE("loading fit: noiseless round trip") {
    const auto fit = fit_loading_curve(loading_series(1e8, 1.0, 30, 5.0));
    CHECK(fit.converged);
    CHECK(fit.value("N0") == doctest::Approx(1e8).epsilon(1e-6));
    CHECK(fit.value("tau") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.value("R") == doctest::Approx(1e8).epsilon(1e-6));
    CHECK_FALSE(fit.low_confidence);
}

TEST_CASE("loading fit: 3% noise, seeded trials") {
    int good = 0;
    const int trials = 200;
    for (int k = 0; k < trials; ++k) {
        auto rng = make_stream(1, "test.loading.noise", k);
        auto s = loading_series(1e8, 1.0, 30, 5.0);
        add_noise(s.y, 0.03, rng);
        const auto fit = fit_loading_curve(s);
        if (std::abs(fit.value("N0") / 1e8 - 1) < 0.05 && std::abs(fit.value("tau") - 1) < 0.05) ++good;
    }
    CHECK(good >= 190);
}

TEST_CASE("loading fit: standard errors shrink with more samples") {
    double se_small = 0, se_large = 0;
    const int trials = 40;
    for (int k = 0; k < trials; ++k) {
        auto rng = make_stream(9, "test.loading.se", k);
        auto a = loading_series(1e8, 1.0, 30, 5.0);
        auto b = loading_series(1e8, 1.0, 60, 5.0);
        add_noise(a.y, 0.03, rng);
        add_noise(b.y, 0.03, rng);
        se_small += fit_loading_curve(a).error("tau");
        se_large += fit_loading_curve(b).error("tau");
    }
    const double ratio = se_small / se_large;  // ideally sqrt(2) for twice the samples
    CHECK(ratio > 1.2);
    CHECK(ratio < 1.7);
}

TEST_CASE("loading fit: bad inputs") {
    auto s = loading_series(1e8, 1.0, 4, 5.0);
    CHECK_THROWS_AS(fit_loading_curve(s), InvalidInput);
    SampleSeries flat;
    for (int i = 0; i < 10; ++i) {
        flat.x.push_back(i);
        flat.y.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_loading_curve(flat), InvalidInput);
    auto unsorted = loading_series(1e8, 1.0, 10, 5.0);
    std::swap(unsorted.x[2], unsorted.x[3]);
    CHECK_THROWS_AS(fit_loading_curve(unsorted), InvalidInput);
    // time window far shorter than tau
    const auto short_fit = fit_loading_curve(loading_series(1e8, 0.05, 30, 5.0));
    CHECK(short_fit.low_confidence);
}

TEST_CASE("linear fit") {
    SampleSeries s;
    for (int i = 1; i <= 12; ++i) {
        s.x.push_back(1e14 * i);
        s.y.push_back(1e-15 * s.x.back());
    }
    auto fit = fit_linear(s);
    CHECK(fit.value("slope") == doctest::Approx(1e-15).epsilon(1e-14));
    CHECK(std::abs(fit.value("intercept")) < 1e-13);

    // loss-rate data: x = n_e v over the default figure sweep, 10% proportional noise
    std::vector<double> xs;
    for (double p_e : {0.34704370179948585, 0.13817809621289662, 0.0652489125181247})
        for (double n : {2e6, 8e6, 1.4e7, 2e7}) xs.push_back(n * p_e / 1.8643400040640523e-09 * 0.40379789539695643);
    int good_plain = 0, good_prop = 0, good_weighted = 0;
    for (int k = 0; k < 200; ++k) {
        auto rng = make_stream(4, "test.linear.noise", k);
        SampleSeries n;
        for (double x : xs) {
            n.x.push_back(x);
            n.y.push_back(0.2 + 1e-15 * x);
        }
        add_noise(n.y, 0.10, rng);
        if (std::abs(fit_linear(n).value("slope") / 1e-15 - 1) < 0.15) ++good_plain;
        if (std::abs(fit_linear_proportional(n).value("slope") / 1e-15 - 1) < 0.15) ++good_prop;
        for (double y : n.y) n.uncertainty.push_back(0.1 * y);
        if (std::abs(fit_linear(n).value("slope") / 1e-15 - 1) < 0.15) ++good_weighted;
    }
    CHECK(good_prop >= 190);
    CHECK(good_weighted >= 190);
    CHECK(good_plain < good_prop);  // ignoring the noise model costs accuracy

    SampleSeries w{{0, 1, 2, 3}, {1, 3, 5, 7}, {0.1, 0.1, 0.2, 0.2}};
    fit = fit_linear(w);
    CHECK(fit.value("slope") == doctest::Approx(2.0));
    CHECK(fit.value("intercept") == doctest::Approx(1.0));
    SampleSeries degenerate{{1, 1, 1}, {1, 2, 3}, {}};
    CHECK_THROWS_AS(fit_linear(degenerate), InvalidInput);
}

TEST_CASE("density image fit: noiseless round trips") {
    const auto cr = chromium52();
    const QuadrupoleField field{0.1};
    const auto cloud = make_cloud(1e8, 100e-6, cr.magnetic_moment(4.0), field, cr);
    for (auto mode : {ImageMode::ColumnAlongZ, ImageMode::ColumnAlongX, ImageMode::SliceZ0}) {
        const double half = mode == ImageMode::ColumnAlongX ? 1.2e-3 : 2.0e-3;
        const auto img = make_image(cloud, mode, 48, half);
        const auto fit = fit_density_image(img, field, cr);
        CHECK(fit.converged);
        CHECK(fit.value("temperature") == doctest::Approx(100e-6).epsilon(1e-4));
        CHECK(fit.value("mu_bar") == doctest::Approx(cr.magnetic_moment(4.0)).epsilon(1e-4));
        CHECK(fit.value("n0") == doctest::Approx(cloud.peak_density).epsilon(1e-4));
    }
}

TEST_CASE("density image fit: 5% pixel noise") {
    const auto cr = chromium52();
    const QuadrupoleField field{0.1};
    const double mu = 5.25 * PhysConstants::mu_B;
    const auto cloud = make_cloud(1e8, 100e-6, mu, field, cr);
    const auto clean = make_image(cloud, ImageMode::ColumnAlongZ, 64, 2.0e-3);
    int good = 0;
    for (int k = 0; k < 20; ++k) {
        auto img = clean;
        auto rng = make_stream(8, "test.image.noise", k);
        add_noise(img.values, 0.05, rng);
        const auto fit = fit_density_image(img, field, cr);
        const double mu_fit = fit.value("mu_bar") / PhysConstants::mu_B;
        if (std::abs(fit.value("temperature") / 100e-6 - 1) < 0.10 && mu_fit >= 4.5 && mu_fit <= 6.0) ++good;
    }
    CHECK(good >= 19);
}

TEST_CASE("density image fit: gravity along the wrong axis") {
    const auto cr = chromium52();
    const QuadrupoleField field{0.1};
    const auto cloud = make_cloud(1e8, 100e-6, cr.magnetic_moment(4.0), field, cr);
    auto img = make_image(cloud, ImageMode::ColumnAlongZ, 32, 2.0e-3);
    // flip the vertical axis so the sag points up
    DensityImage flipped = img;
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            flipped.values[static_cast<std::size_t>(r) * img.cols + c] = img.at(img.rows - 1 - r, c);
    CHECK_THROWS_AS(fit_density_image(flipped, field, cr), GravityAxisMisidentified);
}

TEST_CASE("two-body fit") {
    const auto cr = chromium52();
    const auto cloud = make_cloud(1e8, 100e-6, cr.magnetic_moment(4.0), {0.1}, cr);
    RateModel m;
    m.background_lifetime = 60.0;
    m.two_body_coeff = 7e-17;
    m.volume.initial = cloud.effective_volume;
    m.volume.growth = 0.1;
    const auto traj = integrate_mt_decay(1e16, m, 5.0, 0.2);
    SampleSeries density, volume;
    for (const auto& s : traj) {
        density.x.push_back(s.time);
        density.y.push_back(s.peak_density);
        volume.x.push_back(s.time);
        volume.y.push_back(s.volume);
    }
    const auto fit = fit_two_body_loss(density, 60.0, volume);
    CHECK(fit.converged);
    CHECK(fit.value("beta") == doctest::Approx(7e-17).epsilon(1e-4));
    CHECK(fit.value("V0") == doctest::Approx(cloud.effective_volume).epsilon(1e-9));
    CHECK(fit.value("alpha") == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(fit.value("t0_sensitivity") < 0.15);

    TwoBodyFitOptions fixed;
    fixed.fix_initial_density = true;
    CHECK(fit_two_body_loss(density, 60.0, volume, fixed).value("beta") == doctest::Approx(7e-17).epsilon(1e-4));

    // beta = 0 with noise: consistent with zero
    m.two_body_coeff = 0.0;
    const auto flat = integrate_mt_decay(1e16, m, 5.0, 0.2);
    auto rng = make_stream(3, "test.twobody.zero");
    SampleSeries d0;
    for (const auto& s : flat) {
        d0.x.push_back(s.time);
        d0.y.push_back(s.peak_density);
    }
    add_noise(d0.y, 0.01, rng);
    const auto zero = fit_two_body_loss(d0, 60.0, volume);
    CHECK(std::abs(zero.value("beta")) < 2.0 * zero.error("beta") + 1e-30);
}
