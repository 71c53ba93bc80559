#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mtload/collisions.hpp"
#include "mtload/dynamics.hpp"
#include "mtload/errors.hpp"

using namespace mtload;

TEST_CASE("mean collision velocity") {
    const auto cr = chromium52();
    CHECK(mean_collision_velocity(300e-6, 100e-6, cr) == doctest::Approx(0.4037978953969565).epsilon(1e-12));
    CHECK(mean_collision_velocity(1200e-6, 400e-6, cr) ==
          doctest::Approx(2.0 * mean_collision_velocity(300e-6, 100e-6, cr)).epsilon(1e-14));
    const double single = std::sqrt(8.0 * PhysConstants::k_B * 100e-6 / (std::numbers::pi * cr.mass));
    CHECK(mean_collision_velocity(100e-6, 0.0, cr) == doctest::Approx(single).epsilon(1e-14));
    CHECK_THROWS_AS(mean_collision_velocity(0.0, 0.0, cr), InvalidInput);
    CHECK_THROWS_AS(mean_collision_velocity(-1.0, 1e-4, cr), InvalidInput);
}

TEST_CASE("excited MOT density and decay rate") {
    CHECK(excited_mot_density(1e7, 0.35, 1.57e-9) == doctest::Approx(2.229e15).epsilon(1e-3));
    CHECK(excited_mot_density(1e7, 0.0, 1.57e-9) == 0.0);
    CHECK(excited_mot_density(1e7, 0.35, 3.14e-9) == doctest::Approx(excited_mot_density(1e7, 0.35, 1.57e-9) / 2));
    CHECK_THROWS_AS(excited_mot_density(1e7, 0.35, 0.0), InvalidInput);
    CHECK(mot_on_decay_rate(0.0, 1e-15, 0.4, 0.2) == 0.2);
    CHECK(mot_on_decay_rate(1e15, 1e-15, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(collisional_decay_rate(1e15, 1e-15, 1.0) == doctest::Approx(1.0));
    for (double bg : {1.0 / 20.0, 0.2, 0.5}) CHECK_NOTHROW(mot_on_decay_rate(1e15, 1e-15, 1.0, bg));
}

TEST_CASE("overlap correction") {
    CHECK(overlap_correction(0.01) == doctest::Approx(0.97827).epsilon(1e-4));
    CHECK(overlap_correction(0.1) == doctest::Approx(0.806804).epsilon(1e-5));
    CHECK(overlap_correction(0.25) == doctest::Approx(0.5961065816497264).epsilon(1e-6));
    CHECK(overlap_correction(0.5) == doctest::Approx(0.37637).epsilon(1e-4));
    CHECK(overlap_correction(1.0) == doctest::Approx(0.171203).epsilon(1e-5));
    const double f = overlap_correction(0.25);
    CHECK(f >= 0.5);
    CHECK(f <= 0.8);
    CHECK(overlap_correction(1e-4) == doctest::Approx(1.0).epsilon(1e-3));
    double previous = 1.0;
    for (int k = 1; k <= 20; ++k) {
        const double v = overlap_correction(0.05 * k);
        CHECK(v < previous);
        previous = v;
    }
    CHECK_THROWS_AS(overlap_correction(0.0), InvalidInput);
    CHECK_THROWS_AS(overlap_correction(1.5), InvalidInput);
}

TEST_CASE("two-body cross section") {
    CHECK(cross_section_from_beta(7e-17, 0.2) == doctest::Approx(3.5e-16));
    CHECK(cross_section_from_beta(0.0, 0.2) == 0.0);
    CHECK(cross_section_from_beta(7e-17, 0.4) == doctest::Approx(cross_section_from_beta(7e-17, 0.2) / 2));
    CHECK_THROWS_AS(cross_section_from_beta(7e-17, 0.0), InvalidInput);
}
