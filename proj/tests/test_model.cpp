#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cavjt/errors.hpp"
#include "cavjt/model.hpp"

using namespace cavjt;

namespace {

// H_pot built from Pauli matrices, independent of diabatic_potential.
Eigen::Matrix2cd pauli_potential(const ModelParams& p, double x, double y) {
    const cplx i{0.0, 1.0};
    Eigen::Matrix2cd sx, sy, sz, id;
    sx << 0, 1, 1, 0;
    sy << 0, -i, i, 0;
    sz << 1, 0, 0, -1;
    id.setIdentity();
    return 0.5 * (x * x + y * y) * id + 0.5 * p.omega_q() * sz
           + 2.0 * p.lambda() * x * (std::cos(p.phi()) * sx + std::sin(p.phi()) * sy)
           + 2.0 * p.lambda() * y * (std::cos(p.theta()) * sx + std::sin(p.theta()) * sy);
}

double scan_lower_minimum(const ModelParams& p, double varphi, double rho_hi) {
    // Dense scan, then golden section.
    double best = 0.0;
    double best_v = adiabatic_surfaces(p, 0.0, varphi).v_minus;
    const int n = 20000;
    for (int k = 1; k <= n; ++k) {
        const double r = rho_hi * k / n;
        const double v = adiabatic_surfaces(p, r, varphi).v_minus;
        if (v < best_v) {
            best_v = v;
            best = r;
        }
    }
    double a = std::max(0.0, best - rho_hi / n);
    double b = best + rho_hi / n;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (adiabatic_surfaces(p, c, varphi).v_minus < adiabatic_surfaces(p, d, varphi).v_minus) b = d;
        else a = c;
    }
    return 0.5 * (a + b);
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("params validate and reduce phases") {
    CHECK_THROWS_AS(ModelParams(-1.0, 0.5), ConfigError);
    CHECK_THROWS_AS(ModelParams(1.0, -0.5), ConfigError);
    CHECK_THROWS_AS(ModelParams(std::nan(""), 0.5), ConfigError);
    const ModelParams p(1.0, 0.5, -kPi / 2, 5 * kPi);
    CHECK(p.phi() == doctest::Approx(3 * kPi / 2).epsilon(1e-14));
    CHECK(p.theta() == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(p.phi() >= 0.0);
    CHECK(p.theta() < kTwoPi);
}

TEST_CASE("cylindrical predicate") {
    CHECK(ModelParams(1, 0.5, 0, kPi / 2).is_cylindrical());
    CHECK(ModelParams(1, 0.5, 0.3, 0.3 + 3 * kPi / 2).is_cylindrical());
    CHECK(ModelParams(1, 0.5, 1.0, 1.0 - kPi / 2).is_cylindrical());
    CHECK_FALSE(ModelParams(1, 0.5, 0, 0).is_cylindrical());
    CHECK_FALSE(ModelParams(1, 0.5, 0, kPi / 2 + 1e-9).is_cylindrical());
}

TEST_CASE("diabatic potential examples") {
    const ModelParams any(1.7, 0.8, 0.4, 2.1);
    const PotentialMatrix o = diabatic_potential(any, 0.0, 0.0);
    CHECK(o.v11 == doctest::Approx(0.4));
    CHECK(o.v22 == doctest::Approx(-0.4));
    CHECK(std::abs(o.v12) == 0.0);

    const ModelParams std_form(1.3, 0.5, 0.0, kPi / 2);
    const PotentialMatrix v = diabatic_potential(std_form, 0.7, -1.1);
    CHECK(std::abs(v.v12 - 2.0 * 1.3 * cplx(0.7, 1.1)) < 1e-14);

    const ModelParams degenerate(1.3, 0.5, 0.9, 0.9);
    CHECK(std::abs(diabatic_potential(degenerate, 1.0, -1.0).v12) < 1e-15);
}

TEST_CASE("hermiticity and eigen-consistency on random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    std::uniform_real_distribution<double> lam(0.0, 4.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const ModelParams p(lam(rng), std::abs(u(rng)) / 3, ph(rng), ph(rng));
        const double x = u(rng);
        const double y = u(rng);
        const PotentialMatrix v = diabatic_potential(p, x, y);
        REQUIRE(v.v21() == std::conj(v.v12));
        const Eigen::Matrix2cd m = pauli_potential(p, x, y);
        REQUIRE(std::abs(m(0, 1) - v.v12) < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
        const auto s = adiabatic_surfaces(p, std::hypot(x, y), std::atan2(y, x));
        const double scale = std::max(1.0, std::abs(es.eigenvalues()(1)));
        worst = std::max(worst, std::abs(s.v_minus - es.eigenvalues()(0)) / scale);
        worst = std::max(worst, std::abs(s.v_plus - es.eigenvalues()(1)) / scale);
        REQUIRE(s.v_plus >= s.v_minus);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("adiabatic surface special cases") {
    const ModelParams p(2.0, 0.6, 0.0, kPi / 2);
    const auto at0 = adiabatic_surfaces(p, 0.0, 1.234);
    CHECK(at0.v_minus == doctest::Approx(-0.3));
    CHECK(at0.v_plus == doctest::Approx(0.3));

    for (double rho : {0.3, 1.0, 4.5}) {
        const double root = std::sqrt(0.09 + 16.0 * rho * rho);
        for (double vphi = 0.0; vphi < kTwoPi; vphi += 0.37) {
            const auto s = adiabatic_surfaces(p, rho, vphi);
            CHECK(std::abs(s.v_minus - (0.5 * rho * rho - root)) < 1e-12);
            CHECK(std::abs(s.v_plus - (0.5 * rho * rho + root)) < 1e-12);
        }
    }

    const ModelParams degenerate(2.0, 0.6, 0.3, 0.3);
    const double rho = 2.2;
    const auto d = adiabatic_surfaces(degenerate, rho, 3 * kPi / 4);
    CHECK(std::abs(d.v_minus - (0.5 * rho * rho - 0.3)) < 1e-12);
    CHECK(std::abs(d.v_plus - (0.5 * rho * rho + 0.3)) < 1e-12);
    const Eigen::Matrix2cd m = pauli_potential(degenerate, rho * std::cos(3 * kPi / 4), rho * std::sin(3 * kPi / 4));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
    CHECK(std::abs(es.eigenvalues()(0) - d.v_minus) < 1e-12);
}

TEST_CASE("lower_surface matches adiabatic_surfaces") {
    const ModelParams p(1.1, 0.4, 0.2, 1.9);
    for (double x = -3; x <= 3; x += 0.7)
        for (double y = -3; y <= 3; y += 0.9)
            CHECK(lower_surface(p, x, y) == doctest::Approx(adiabatic_surfaces(p, std::hypot(x, y), std::atan2(y, x)).v_minus));
}

TEST_CASE("sombrero radius") {
    const SurfaceGeometry g = surface_geometry(ModelParams(6.0, 0.5));
    CHECK(std::abs(g.rho_min - std::sqrt(144.0 - std::pow(0.5 / 24.0, 2))) < 1e-8);
    CHECK(g.rho_min == doctest::Approx(11.999982).epsilon(1e-7));
    CHECK(g.gap_at_ci == doctest::Approx(0.5));
    CHECK(g.v_min == doctest::Approx(adiabatic_surfaces(ModelParams(6.0, 0.5), g.rho_min, 0.0).v_minus));

    CHECK(surface_geometry(ModelParams(0.0, 0.7)).rho_min == 0.0);
    CHECK(std::abs(surface_geometry(ModelParams(1.3, 0.0)).rho_min - 2.6) < 1e-9);
    CHECK(std::abs(sombrero_radius(6.0, 0.5) - g.rho_min) < 1e-8);
    CHECK(sombrero_radius(0.1, 0.5) == 0.0);
}

TEST_CASE("minimum certificate and brute-force cross-check") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lam(0.3, 5.0);
    std::uniform_real_distribution<double> om(0.0, 2.0);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int k = 0; k < 25; ++k) {
        const ModelParams p(lam(rng), om(rng), ph(rng), ph(rng));
        const SurfaceGeometry g = surface_geometry(p);
        if (g.rho_min <= 0.0) continue;
        const double v0 = adiabatic_surfaces(p, g.rho_min, g.varphi_min).v_minus;
        CHECK(adiabatic_surfaces(p, g.rho_min + 1e-4, g.varphi_min).v_minus >= v0);
        CHECK(adiabatic_surfaces(p, g.rho_min - 1e-4, g.varphi_min).v_minus >= v0);
        const double r1 = scan_lower_minimum(p, kPi / 4, 4.0 * p.lambda() * 2.0 + 2.0);
        const double r3 = scan_lower_minimum(p, 3 * kPi / 4, 4.0 * p.lambda() * 2.0 + 2.0);
        const double v1 = adiabatic_surfaces(p, r1, kPi / 4).v_minus;
        const double v3 = adiabatic_surfaces(p, r3, 3 * kPi / 4).v_minus;
        CHECK(std::min(v1, v3) == doctest::Approx(g.v_min).epsilon(1e-10));
        CHECK((v1 <= v3 ? r1 : r3) == doctest::Approx(g.rho_min).epsilon(1e-6));
    }
}

TEST_CASE("critical coupling") {
    // Cylindrical ring exists iff 4 lambda^2 > (Omega / 4 lambda)^2, i.e. lambda > sqrt(Omega / 8).
    for (double om : {0.25, 0.5, 1.0, 2.0}) {
        const SurfaceGeometry g = surface_geometry(ModelParams(1.0, om));
        CHECK(g.critical_lambda == doctest::Approx(std::sqrt(om / 8.0)).epsilon(1e-8));
        CHECK(surface_geometry(ModelParams(g.critical_lambda * 0.99, om)).rho_min == 0.0);
        CHECK(surface_geometry(ModelParams(g.critical_lambda * 1.01, om)).rho_min > 0.0);
    }
}

TEST_CASE("correction terms") {
    CHECK_THROWS_AS(correction_terms(ModelParams(1, 0.5), 0.0), std::invalid_argument);
    for (double r : {0.5, 1.0, 3.0}) {
        const auto c = correction_terms(ModelParams(1.2, 0.0), r);
        CHECK(c.v_cent == 0.0);
        CHECK(c.v_gauge_scalar == doctest::Approx(1.0 / (4.0 * r * r)));
    }
    const ModelParams p(1.0, 0.8);
    double peak_r = 0.0;
    double peak = -1.0;
    for (double r = 0.01; r < 2.0; r += 0.01) {
        const double v = correction_terms(p, r).v_cent;
        if (v > peak) {
            peak = v;
            peak_r = r;
        }
    }
    double last = correction_terms(p, peak_r).v_cent;
    for (double r = peak_r + 0.05; r < 60.0; r += 0.05) {
        const double v = correction_terms(p, r).v_cent;
        CHECK(v <= last);
        last = v;
    }
    CHECK(correction_terms(p, 1e4).v_cent < 1e-12);
}

}
