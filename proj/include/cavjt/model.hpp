// model.hpp - parameters, diabatic and adiabatic potentials of the two-mode
// cavity Jahn-Teller Hamiltonian in quadrature representation
//
//   H = (px^2 + py^2 + x^2 + y^2)/2 + (Omega/2) sz
//       + 2 lambda x (cos phi sx + sin phi sy) + 2 lambda y (cos theta sx + sin theta sy)
//
// All quantities are dimensionless (energies in units of the mode frequency).

#pragma once

#include <complex>
#include <utility>

namespace cavjt {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Reduce an angle into [0, 2pi).
double reduce_angle(double a);

class ModelParams {
public:
    ModelParams() = default;
    /// Throws ConfigError for negative or non-finite couplings.
    ModelParams(double lambda, double omega_q, double phi = 0.0, double theta = kPi / 2);

    double lambda() const { return lambda_; }
    double omega_q() const { return omega_q_; }
    double phi() const { return phi_; }
    double theta() const { return theta_; }

    ModelParams with_lambda(double lambda) const { return {lambda, omega_q_, phi_, theta_}; }
    ModelParams with_omega(double omega) const { return {lambda_, omega, phi_, theta_}; }
    ModelParams with_phases(double phi, double theta) const { return {lambda_, omega_q_, phi, theta}; }

    /// |phi - theta| = (j + 1/2) pi, the E x epsilon equivalence condition.
    bool is_cylindrical() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    double lambda_ = 0.0;
    double omega_q_ = 0.0;
    double phi_ = 0.0;
    double theta_ = kPi / 2;
};

/// Pointwise 2x2 Hermitian potential in the diabatic (e, g) basis.
struct PotentialMatrix {
    double v11 = 0.0;
    double v22 = 0.0;
    cplx v12{};

    cplx v21() const { return std::conj(v12); }
    /// (lower, upper) eigenvalues.
    std::pair<double, double> eigenvalues() const;
};

struct AdiabaticPair {
    double v_minus = 0.0;
    double v_plus = 0.0;
};

struct SurfaceGeometry {
    double rho_min = 0.0;
    /// Polar angle of the minimizing direction.
    double varphi_min = 0.0;
    double v_min = 0.0;
    double gap_at_ci = 0.0;
    double critical_lambda = 0.0;
};

struct CorrectionTerms {
    double v_cent = 0.0;
    double v_gauge_scalar = 0.0;
};

PotentialMatrix diabatic_potential(const ModelParams& p, double x, double y);

AdiabaticPair adiabatic_surfaces(const ModelParams& p, double rho, double varphi);

/// Lower surface only; used on the propagation grid.
double lower_surface(const ModelParams& p, double x, double y);

/// Minimizes the lower surface along the directions varphi = pi/4 and 3pi/4 by
/// bisection on the radial derivative. Cylindrical parameters reproduce
/// rho_min = sqrt(4 lambda^2 - (Omega / 4 lambda)^2).
SurfaceGeometry surface_geometry(const ModelParams& p);

/// Closed-form sombrero radius of the cylindrically symmetric case (0 when no ring exists).
double sombrero_radius(double lambda, double omega_q);

/// Centrifugal and scalar gauge corrections of the adiabatic Hamiltonian with the
/// cavity substitutions (detuning -> Omega, coupling -> 2 lambda, m = omega = hbar = 1).
/// Diagnostic only. Throws std::invalid_argument for rho <= 0.
CorrectionTerms correction_terms(const ModelParams& p, double rho);

} // namespace cavjt
