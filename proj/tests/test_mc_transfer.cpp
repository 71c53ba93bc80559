#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mtload/errors.hpp"
#include "mtload/mc_transfer.hpp"
#include "mtload/random.hpp"

using namespace mtload;
using PC = PhysConstants;

TEST_CASE("MOT sampling statistics") {
    const auto cr = chromium52();
    const MotCloud mot{200e-6, 300e-6, 1e7};
    auto rng = make_stream(1, "test.mc.sample");
    const int n = 100000;
    double v2 = 0, v2sq = 0, r = 0, rsq = 0;
    for (int i = 0; i < n; ++i) {
        const auto p = sample_mot_atom(mot, cr, rng);
        const double s = p.velocity.x * p.velocity.x + p.velocity.y * p.velocity.y + p.velocity.z * p.velocity.z;
        const double rad = std::sqrt(p.position.x * p.position.x + p.position.y * p.position.y +
                                     p.position.z * p.position.z);
        v2 += s;
        v2sq += s * s;
        r += rad;
        rsq += rad * rad;
    }
    v2 /= n;
    r /= n;
    const double se_v2 = std::sqrt((v2sq / n - v2 * v2) / n);
    const double se_r = std::sqrt((rsq / n - r * r) / n);
    CHECK(std::abs(v2 - 3 * PC::k_B * 300e-6 / cr.mass) < 3 * se_v2);
    CHECK(std::abs(r - std::sqrt(8 / std::numbers::pi) * 200e-6) < 3 * se_r);

    const MotCloud point{0.0, 300e-6, 1e7};
    for (int i = 0; i < 100; ++i) {
        const auto p = sample_mot_atom(point, cr, rng);
        CHECK(p.position.x == 0.0);
        CHECK(p.position.y == 0.0);
        CHECK(p.position.z == 0.0);
    }
}

TEST_CASE("Zeeman substate sampling") {
    auto rng = make_stream(2, "test.mc.zeeman");
    const auto point = PumpingDistribution::point(4);
    for (int i = 0; i < 100; ++i) CHECK(sample_zeeman_substate(point, rng) == 4);

    const auto uni = PumpingDistribution::uniform();
    CHECK_NOTHROW(uni.validate());
    std::vector<int> counts(9, 0);
    const int n = 90000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_zeeman_substate(uni, rng) + 4)];
    int trapped = 0;
    for (int m = 1; m <= 4; ++m) trapped += counts[static_cast<std::size_t>(m + 4)];
    const double frac = static_cast<double>(trapped) / n;
    CHECK(std::abs(frac - 4.0 / 9.0) < 4 * std::sqrt(4.0 / 9.0 * 5.0 / 9.0 / n));
    for (int c : counts) CHECK(std::abs(c - n / 9.0) < 4 * std::sqrt(n / 9.0 * 8.0 / 9.0));

    PumpingDistribution bad;
    bad.probabilities[0] = 0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad.probabilities[1] = 0.7;
    bad.probabilities[2] = -0.2;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    CHECK_THROWS_AS(PumpingDistribution::point(5), InvalidInput);
}

TEST_CASE("energy audit") {
    const auto cr = chromium52();
    Particle p;
    p.zeeman_m = 4;
    CHECK(transfer_energy_audit(p, {0.2}, cr).potential == 0.0);
    p.position = {1e-4, 0.0, 0.0};
    const double u = transfer_energy_audit(p, {0.2}, cr).potential;
    CHECK(u == doctest::Approx(6 * PC::mu_B * 0.2 * 1e-4).epsilon(1e-14));
    CHECK(u == doctest::Approx(1.11e-27).epsilon(0.01));
    p.position = {0.0, 0.0, 2e-4};
    CHECK(transfer_energy_audit(p, {0.2}, cr).potential == doctest::Approx(2 * u));
    CHECK(transfer_energy_audit(p, {0.2}, cr, PotentialModel::Anisotropic).potential == doctest::Approx(4 * u));
    p.zeeman_m = 2;
    CHECK(transfer_energy_audit(p, {0.4}, cr).potential == doctest::Approx(2 * u));
    p.zeeman_m = -1;
    CHECK_THROWS_AS(transfer_energy_audit(p, {0.2}, cr), InvalidInput);
}

TEST_CASE("equilibrium temperature bookkeeping") {
    const auto cr = chromium52();
    // atoms at the origin carrying (3/2) k_B T_MOT each
    const double t_mot = 300e-6;
    const double speed = std::sqrt(3 * PC::k_B * t_mot / cr.mass);
    std::vector<Particle> ens(6);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        ens[i].zeeman_m = 4;
        double* comp[] = {&ens[i].velocity.x, &ens[i].velocity.y, &ens[i].velocity.z};
        *comp[i % 3] = (i < 3 ? 1 : -1) * speed;
    }
    CHECK(equilibrium_temperature(ens, {0.2}, cr) == doctest::Approx(t_mot / 3).epsilon(1e-12));
    for (auto& p : ens) {
        p.velocity.x *= std::sqrt(2.0);
        p.velocity.y *= std::sqrt(2.0);
        p.velocity.z *= std::sqrt(2.0);
    }
    CHECK(equilibrium_temperature(ens, {0.2}, cr) == doctest::Approx(2 * t_mot / 3).epsilon(1e-12));
}

TEST_CASE("ensemble run reproduces the closed-form prediction") {
    const auto cr = chromium52();
    TransferConfig cfg;
    cfg.mot = {200e-6, 300e-6, 1e7};
    cfg.field = {0.2};
    cfg.particles = 100000;
    const auto s = run_transfer_ensemble(cfg, cr);
    const double predicted = predict_mt_temperature(cfg.mot, cfg.field, cr.magnetic_moment(4.0));
    CHECK(predicted == doctest::Approx(157.168e-6).epsilon(1e-4));
    CHECK(s.trapped == 100000);
    CHECK(s.temperature == doctest::Approx(predicted).epsilon(0.02));
    CHECK(std::abs(s.mean_radius - std::sqrt(8 / std::numbers::pi) * 200e-6) < 3 * s.mean_radius_stderr);
    CHECK(s.mean_m_d == 4.0);
}

TEST_CASE("ensemble results do not depend on the thread count") {
    const auto cr = chromium52();
    TransferConfig cfg;
    cfg.mot = {150e-6, 200e-6, 1e7};
    cfg.field = {0.1};
    cfg.pumping = PumpingDistribution::uniform();
    cfg.particles = 50000;
    const auto one = run_transfer_ensemble(cfg, cr);
    cfg.threads = 4;
    const auto four = run_transfer_ensemble(cfg, cr);
    CHECK(one.temperature == four.temperature);
    CHECK(one.trapped == four.trapped);
    CHECK(one.mean_radius == four.mean_radius);
    CHECK(std::abs(static_cast<double>(one.trapped) / one.sampled - 4.0 / 9.0) < 0.01);
    cfg.seed = 2;
    CHECK(run_transfer_ensemble(cfg, cr).temperature != one.temperature);
}
