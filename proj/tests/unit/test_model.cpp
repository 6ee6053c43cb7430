#include <doctest.h>

#include <cmath>
#include <numbers>

#include "llq/error.hpp"
#include "llq/model.hpp"

using namespace llq;

TEST_CASE("discretize: dx = 0.1, g = -2") {
    ContinuumParams cp;
    cp.n_particles = 1;
    cp.g = -2.0;
    cp.box_length = 1.0;
    auto lp = discretize(cp, 10, 4);
    CHECK(lp.dx == doctest::Approx(0.1));
    CHECK(lp.hopping == doctest::Approx(50.0));
    CHECK(lp.onsite_u == doctest::Approx(-20.0));
}

TEST_CASE("discretize: free gas") {
    ContinuumParams cp;
    cp.n_particles = 2;
    cp.g = 0.0;
    cp.box_length = 3.0;
    auto lp = discretize(cp, 30, 4);
    CHECK(lp.onsite_u == 0.0);
    CHECK(lp.hopping == doctest::Approx(1.0 / (2.0 * 0.1 * 0.1)));
    for (double v : lp.potential) CHECK(v == 0.0);
}

TEST_CASE("discretize: 18 particles on 1280 sites") {
    ContinuumParams cp;
    cp.n_particles = 18;
    cp.omega = 1.0;
    cp.box_length = default_box_length(18, 1.0);
    cp.rho = tg_central_density(18, 1.0);
    cp.g = -18.7931 * cp.rho;
    auto lp = discretize(cp, 1280, 4);
    CHECK(lp.n_sites == 1280);
    CHECK(lp.onsite_u < 0.0);
    CHECK(lp.potential.size() == 1280u);
    // trap is symmetric about the box center
    CHECK(lp.potential.front() == doctest::Approx(lp.potential.back()));
}

TEST_CASE("discretize: halving dx quadruples J and doubles |U|") {
    ContinuumParams cp;
    cp.n_particles = 3;
    cp.g = -4.0;
    cp.box_length = 5.0;
    auto a = discretize(cp, 40, 4);
    auto b = discretize(cp, 80, 4);
    CHECK(b.hopping == doctest::Approx(4.0 * a.hopping));
    CHECK(b.onsite_u == doctest::Approx(2.0 * a.onsite_u));
}

TEST_CASE("discretize: rejects dense filling and tiny cutoff") {
    ContinuumParams cp;
    cp.n_particles = 3;
    cp.box_length = 1.0;
    CHECK_THROWS_AS(discretize(cp, 20, 4), ConfigError);  // 0.15
    CHECK_NOTHROW(discretize(cp, 21, 4));
    CHECK_THROWS_AS(discretize(cp, 40, 1), ConfigError);
    cp.box_length = -1.0;
    CHECK_THROWS_AS(discretize(cp, 40, 4), ConfigError);
}

TEST_CASE("tonks parameter and scattering length") {
    CHECK(tonks_parameter(-2.0, 1.0) == -2.0);
    CHECK(tonks_parameter(0.0, 5.0) == 0.0);
    CHECK(scattering_length(-2.0) == doctest::Approx(1.0));
    CHECK(scattering_length(4.0) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(scattering_length(0.0), ConfigError);
    CHECK_THROWS_AS(tonks_parameter(1.0, 0.0), ConfigError);
    for (double g : {-7.3, -0.2, 0.9, 12.0})
        for (double rho : {0.3, 1.0, 4.5}) {
            double a = scattering_length(g);
            CHECK(tonks_parameter(g, rho) == doctest::Approx(-2.0 / (a * rho)));
        }
}

TEST_CASE("beat frequency") {
    CHECK(beat_frequency(-10.0, 2.0) == doctest::Approx(100.0));
    CHECK(beat_frequency(-1.0, 1.0) == doctest::Approx(0.25));
    // trap form equals the density form at the TG central density up to the
    // ratio rho^2 / (N omega) = 2 / pi^2
    int n = 18;
    double w = 0.7;
    double rho = tg_central_density(n, w);
    CHECK(beat_frequency(-5.0, rho) / beat_frequency_trap(-5.0, n, w) ==
          doctest::Approx(2.0 / (std::numbers::pi * std::numbers::pi)));
    CHECK(beat_frequency_trap(-2.0, 4, 1.5) == doctest::Approx(6.0));
}

TEST_CASE("units") {
    auto u = UnitSystem::for_density(2.0);
    CHECK(u.time_unit == 1.0);
    CHECK(u.to_physical(u.to_units(0.37)) == doctest::Approx(0.37));
    CHECK_THROWS_AS(UnitSystem::for_density(0.0), ConfigError);
}

TEST_CASE("lattice binding energy tends to g^2/4 for fine grids") {
    // continuum pair: E_b = g^2 / 4 (reduced mass 1/2)
    double g = -6.0;
    double prev = 0.0;
    for (int m : {50, 200, 800}) {
        LatticeParams lp;
        lp.dx = 1.0 / m;
        lp.hopping = 1.0 / (2.0 * lp.dx * lp.dx);
        lp.onsite_u = g / lp.dx;
        double eb = lp.lattice_binding_energy();
        CHECK(eb > prev);
        prev = eb;
    }
    CHECK(prev == doctest::Approx(g * g / 4.0).epsilon(1e-3));
}
