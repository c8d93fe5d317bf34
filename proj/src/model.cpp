#include "cavjt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cavjt/errors.hpp"

namespace cavjt {

double reduce_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

ModelParams::ModelParams(double lambda, double omega_q, double phi, double theta)
    : lambda_(lambda), omega_q_(omega_q), phi_(reduce_angle(phi)), theta_(reduce_angle(theta)) {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ConfigError("lambda must be finite and >= 0, got " + std::to_string(lambda));
    if (!std::isfinite(omega_q) || omega_q < 0.0)
        throw ConfigError("omega_q must be finite and >= 0, got " + std::to_string(omega_q));
    if (!std::isfinite(phi) || !std::isfinite(theta))
        throw ConfigError("field phases must be finite");
}

bool ModelParams::is_cylindrical() const {
    const double d = std::fmod(std::abs(phi_ - theta_), kPi);
    return std::abs(d - kPi / 2) <= 1e-12;
}

std::pair<double, double> PotentialMatrix::eigenvalues() const {
    const double mean = 0.5 * (v11 + v22);
    const double half = 0.5 * (v11 - v22);
    const double r = std::sqrt(half * half + std::norm(v12));
    return {mean - r, mean + r};
}

PotentialMatrix diabatic_potential(const ModelParams& p, double x, double y) {
    const double harmonic = 0.5 * (x * x + y * y);
    const double half_gap = 0.5 * p.omega_q();
    PotentialMatrix v;
    v.v11 = harmonic + half_gap;
    v.v22 = harmonic - half_gap;
    v.v12 = 2.0 * p.lambda() * (x * std::polar(1.0, -p.phi()) + y * std::polar(1.0, -p.theta()));
    return v;
}

namespace {

// 1 + cos(phi - theta) sin(2 varphi), clamped against rounding below zero.
double angular_factor(const ModelParams& p, double varphi) {
    return std::max(0.0, 1.0 + std::cos(p.phi() - p.theta()) * std::sin(2.0 * varphi));
}

// Radial minimum of rho^2/2 - sqrt(Omega^2/4 + 4 lambda^2 k rho^2).
// The derivative is rho * g(rho) with g increasing, so the minimum sits at the
// root of g when g(0) < 0 and at the origin otherwise.
double radial_minimum(double lambda, double omega, double k) {
    const double c = 4.0 * lambda * lambda * k;
    if (c <= 0.0) return 0.0;
    auto g = [&](double rho) { return 1.0 - c / std::sqrt(0.25 * omega * omega + c * rho * rho); };
    if (g(0.0) >= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 2.0 * lambda * std::sqrt(k) + 1.0;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double lower_value(double lambda, double omega, double k, double rho) {
    return 0.5 * rho * rho - std::sqrt(0.25 * omega * omega + 4.0 * lambda * lambda * k * rho * rho);
}

} // namespace

AdiabaticPair adiabatic_surfaces(const ModelParams& p, double rho, double varphi) {
    const double lam = p.lambda();
    const double root = std::sqrt(0.25 * p.omega_q() * p.omega_q()
                                  + 4.0 * lam * lam * rho * rho * angular_factor(p, varphi));
    return {0.5 * rho * rho - root, 0.5 * rho * rho + root};
}

double lower_surface(const ModelParams& p, double x, double y) {
    const double coupling = std::norm(x * std::polar(1.0, -p.phi()) + y * std::polar(1.0, -p.theta()));
    const double lam = p.lambda();
    return 0.5 * (x * x + y * y)
           - std::sqrt(0.25 * p.omega_q() * p.omega_q() + 4.0 * lam * lam * coupling);
}

SurfaceGeometry surface_geometry(const ModelParams& p) {
    const double c = std::cos(p.phi() - p.theta());
    const double lam = p.lambda();
    const double omega = p.omega_q();

    struct Candidate { double varphi, k, rho, v; };
    Candidate cand[2] = {{kPi / 4, 1.0 + c, 0.0, 0.0}, {3.0 * kPi / 4, 1.0 - c, 0.0, 0.0}};
    for (auto& cd : cand) {
        cd.k = std::max(0.0, cd.k);
        cd.rho = radial_minimum(lam, omega, cd.k);
        cd.v = lower_value(lam, omega, cd.k, cd.rho);
    }
    const Candidate& best = cand[1].v < cand[0].v ? cand[1] : cand[0];

    SurfaceGeometry geo;
    geo.rho_min = best.rho;
    geo.varphi_min = best.varphi;
    geo.v_min = best.v;
    geo.gap_at_ci = omega;

    // Smallest coupling that opens a ring, found on the same minimizer.
    const double k_max = std::max(cand[0].k, cand[1].k);
    if (omega > 0.0 && k_max > 0.0) {
        auto has_ring = [&](double l) { return radial_minimum(l, omega, k_max) > 0.0; };
        double lo = 0.0;
        double hi = 1.0;
        while (!has_ring(hi)) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (has_ring(mid) ? hi : lo) = mid;
        }
        geo.critical_lambda = hi;
    }
    return geo;
}

double sombrero_radius(double lambda, double omega_q) {
    if (lambda <= 0.0) return 0.0;
    const double q = omega_q / (4.0 * lambda);
    const double r2 = 4.0 * lambda * lambda - q * q;
    return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

CorrectionTerms correction_terms(const ModelParams& p, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("correction_terms: rho must be > 0");
    const double coupling = 2.0 * p.lambda();
    const double d = p.omega_q();
    const double s = d * d + 4.0 * coupling * coupling * rho * rho;
    CorrectionTerms out;
    out.v_cent = coupling * coupling * d * d / (2.0 * s * s);
    const double ratio = s > 0.0 ? d / std::sqrt(s) : 1.0;
    out.v_gauge_scalar = (1.0 / (2.0 * rho * rho)) * (1.0 + ratio) * 0.5;
    return out;
}

} // namespace cavjt
