#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cavjt/berry.hpp"
#include "cavjt/errors.hpp"

using namespace cavjt;

namespace {

// Discrete Berry phase (Wilson loop) of the lower eigenvector of the 2x2
// potential, -arg prod <u_k|u_{k+1}>; gauge-free.
double wilson_loop_phase(const ModelParams& p, double radius, int n) {
    std::vector<Eigen::Vector2cd> u(n);
    for (int k = 0; k < n; ++k) {
        const double v = kTwoPi * k / n;
        const PotentialMatrix m = diabatic_potential(p, radius * std::cos(v), radius * std::sin(v));
        Eigen::Matrix2cd h;
        h << m.v11, m.v12, m.v21(), m.v22;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
        u[k] = es.eigenvectors().col(0);
    }
    cplx prod = 1.0;
    for (int k = 0; k < n; ++k) prod *= u[k].dot(u[(k + 1) % n]);
    return -std::arg(prod);
}

double mod2pi_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

} // namespace

TEST_SUITE("berry") {

TEST_CASE("adiabatic angles") {
    const ModelParams cyl(1.5, 0.7, 0.0, kPi / 2);
    for (double v = -3.0; v < 3.0; v += 0.25) {
        const auto a = adiabatic_angles(cyl, 2.0, v);
        CHECK(std::abs(std::remainder(a.mu - v, kTwoPi)) < 1e-14);
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int k = 0; k < 200; ++k) {
        const ModelParams p(1.3, 0.9, ph(rng), ph(rng));
        const double v = ph(rng);
        const double rho = 0.5 + ph(rng);
        const auto a = adiabatic_angles(p, rho, v);
        const double factor = 1.0 + std::sin(2 * v) * std::cos(p.phi() - p.theta());
        CHECK(a.nu >= 0.0);
        CHECK(a.nu <= kPi / 2);
        CHECK(std::abs(std::tan(2 * a.nu) - 4 * 1.3 * rho * std::sqrt(factor) / 0.9) < 1e-12 * std::max(1.0, std::tan(2 * a.nu)));
    }
    CHECK(adiabatic_angles(ModelParams(1.0, 1e12), 1.0, 0.3).nu < 1e-10);
    CHECK(adiabatic_angles(ModelParams(1.0, 0.0), 1.0, 0.3).nu == doctest::Approx(kPi / 4));
    const ModelParams deg(1.0, 0.5, 0.8, 0.8);
    CHECK(std::abs(std::remainder(adiabatic_angles(deg, 1.0, 0.0).mu - 0.8, kTwoPi)) < 1e-14);
}

TEST_CASE("mu branch follows the previous sample") {
    const ModelParams cyl(1.0, 0.5);
    const auto a = adiabatic_angles(cyl, 1.0, 0.1, 4 * kPi);
    CHECK(a.mu == doctest::Approx(4 * kPi + 0.1));
}

TEST_CASE("sign change at zero detuning for any radius") {
    for (double r : {0.05, 0.5, 2.0, 10.0, 40.0}) {
        const double g = berry_phase_numeric(ModelParams(0.8, 0.0, 0.0, kPi / 2), r);
        CHECK(std::abs(g + kPi) < 1e-10);
    }
}

TEST_CASE("intersecting-curve cases carry no phase") {
    for (double phi : {0.0, 0.5, 2.0})
        for (double r : {0.3, 3.0}) {
            CHECK(berry_phase_numeric(ModelParams(1.2, 0.7, phi, phi), r) == 0.0);
            CHECK(berry_phase_numeric(ModelParams(1.2, 0.7, phi, phi + kPi), r) == 0.0);
        }
}

TEST_CASE("closed form against numeric in the cylindrical case") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(0.05, 8.0);
    std::uniform_real_distribution<double> om(0.0, 3.0);
    std::uniform_real_distribution<double> rr(0.05, 15.0);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int k = 0; k < 100; ++k) {
        const double phi = ph(rng);
        const ModelParams p(lam(rng), om(rng), phi, phi + (k % 2 ? kPi / 2 : -kPi / 2));
        const double r = rr(rng);
        const double closed = berry_phase_closed_form(p, r);
        const double numeric = berry_phase_numeric(p, r);
        CHECK(mod2pi_distance(closed, numeric) < 1e-8);
    }
    CHECK_THROWS_AS(berry_phase_closed_form(ModelParams(1, 0.5, 0, 0.3), 1.0), std::invalid_argument);
}

TEST_CASE("values at the sombrero minimum") {
    // With rho_min^2 = 4 lambda^2 - (Omega / 4 lambda)^2 the closed form collapses to
    // -pi (1 + Omega / (8 lambda^2)).
    for (double lam : {3.0, 6.0}) {
        const ModelParams p(lam, 0.5);
        const double r = surface_geometry(p).rho_min;
        const double expected = -kPi * (1.0 + 0.5 / (8.0 * lam * lam));
        CHECK(std::abs(berry_phase_numeric(p, r) - expected) < 1e-8);
        CHECK(std::abs(berry_phase_closed_form(p, r) - expected) < 1e-12);
    }
    CHECK(berry_phase_closed_form(ModelParams(6.0, 0.5), 11.999982) == doctest::Approx(-3.14705).epsilon(1e-6));
    CHECK(berry_phase_closed_form(ModelParams(2.0, 0.0), 1.0) == doctest::Approx(-kPi));
    CHECK(berry_phase_closed_form(ModelParams(2.0, 0.7), 1e9) == doctest::Approx(-kPi));
}

TEST_CASE("numeric phase agrees with a gauge-free Wilson loop for general phases") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int k = 0; k < 20; ++k) {
        const ModelParams p(1.0 + k * 0.2, 0.8, ph(rng), ph(rng));
        const double r = 0.4 + 0.1 * k;
        const double numeric = berry_phase_numeric(p, r);
        const double wilson = wilson_loop_phase(p, r, 1 << 15);
        CHECK(mod2pi_distance(numeric, wilson) < 1e-6);
    }
}

TEST_CASE("gauge robustness") {
    const ModelParams p(1.4, 0.6, 0.3, 1.2);
    BerryOptions plain;
    BerryOptions shifted;
    shifted.gauge = [](double v) { return 0.7 * std::sin(v) + 0.2 * std::cos(3 * v) + 1.5; };
    CHECK(std::abs(berry_phase_numeric(p, 1.7, plain) - berry_phase_numeric(p, 1.7, shifted)) < 1e-10);
}

TEST_CASE("convergence order of the quadrature") {
    const ModelParams p(1.0, 0.9, 0.2, 1.3);
    const double r = 0.6;
    const double reference = berry_phase_numeric(p, r);
    const double e1 = std::abs(std::remainder(berry_phase_sum(p, r, 64) - reference, kTwoPi));
    const double e2 = std::abs(std::remainder(berry_phase_sum(p, r, 128) - reference, kTwoPi));
    CHECK(e2 > 0.0);
    CHECK(e1 / e2 >= 4.0);
}

TEST_CASE("wrap_phase range") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(-kTwoPi + 1e-12) == 0.0);
    CHECK(wrap_phase(kPi / 2) == doctest::Approx(-3 * kPi / 2));
    CHECK(wrap_phase(-kPi) == doctest::Approx(-kPi));
    CHECK(wrap_phase(-3 * kPi) == doctest::Approx(-kPi));
}

TEST_CASE("argument checks") {
    const ModelParams p(1.0, 0.5);
    CHECK_THROWS_AS(berry_phase_numeric(p, 0.0), std::invalid_argument);
    BerryOptions few;
    few.n_samples = 32;
    CHECK_THROWS_AS(berry_phase_numeric(p, 1.0, few), std::invalid_argument);
    BerryOptions capped;
    capped.n_samples = 64;
    capped.max_samples = 128;
    capped.tolerance = 1e-300;
    CHECK_THROWS_AS(berry_phase_numeric(ModelParams(1.0, 0.9, 0.2, 1.3), 0.6, capped), ConvergenceError);
    try {
        berry_phase_numeric(ModelParams(1.0, 0.9, 0.2, 1.3), 0.6, capped);
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.last_estimate));
        CHECK(std::isfinite(e.previous_estimate));
    }
}

TEST_CASE("phase map limits and symmetry") {
    const ModelParams base(1.0, 1.0, 0.0);
    const PhaseMap m = phase_map(base, {0.5, 10.0, 6}, {0.0, kPi, 9}, {}, 2);
    REQUIRE(m.gamma.size() == 54);
    for (double g : m.gamma) {
        CHECK(g <= 0.0);
        CHECK(g > -kTwoPi);
    }
    for (std::size_t i = 0; i < m.lambda_axis.size(); ++i) {
        CHECK(m.at(i, 0) == 0.0);
        CHECK(m.at(i, 8) == 0.0);
        for (std::size_t j = 0; j < 9; ++j) CHECK(std::abs(m.at(i, j) - m.at(i, 8 - j)) < 1e-7);
    }
    CHECK(std::abs(m.at(5, 4) + kPi) < 0.05);
    CHECK_THROWS_AS(phase_map(base, {0.1, 1.0, 3}, {0.0, 1.0, 2}), std::invalid_argument);
}

}
