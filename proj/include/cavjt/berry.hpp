// berry.hpp - geometric phase of the lower adiabatic state around the conical
// intersection.
//
// The lower adiabatic state is (sin nu, -cos nu e^{i mu}) with
//   tan(2 nu) = (4 lambda rho / Omega) sqrt(1 + sin(2 varphi) cos(phi - theta)),
//   mu        = arg(x e^{i phi} + y e^{i theta}),
// and the loop phase at radius R is gamma = -oint cos^2(nu) dmu.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cavjt/model.hpp"

namespace cavjt {

struct AdiabaticAngles {
    double nu = 0.0;
    double mu = 0.0;
};

/// Mixing and phase angles at polar point (rho, varphi). When `previous_mu` is
/// given, mu is moved onto the 2pi branch closest to it.
AdiabaticAngles adiabatic_angles(const ModelParams& p, double rho, double varphi,
                                 std::optional<double> previous_mu = std::nullopt);

struct BerryOptions {
    int n_samples = 256;
    int max_samples = 1 << 22;
    double tolerance = 1e-8;
    /// Optional single-valued gauge f(varphi): the adiabatic state is multiplied by e^{i f}.
    std::function<double(double)> gauge;
};

/// Map a phase into (-2pi, 0]; values within 1e-9 of a multiple of 2pi map to 0.
double wrap_phase(double gamma);

/// Raw (unwrapped) loop sum at a fixed number of samples; no refinement.
double berry_phase_sum(const ModelParams& p, double radius, int n_samples,
                       const std::function<double(double)>& gauge = {});

/// Converged loop phase in (-2pi, 0]. Doubles the sampling until two successive
/// estimates agree mod 2pi within `tolerance`; throws ConvergenceError otherwise.
double berry_phase_numeric(const ModelParams& p, double radius, const BerryOptions& opt = {});

/// gamma(R) = -pi (1 + w Omega / sqrt(Omega^2 + 16 lambda^2 R^2)), w = sign sin(theta - phi);
/// cylindrical parameters only.
double berry_phase_closed_form(const ModelParams& p, double radius);

struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;

    double at(int i) const { return count > 1 ? lo + (hi - lo) * i / (count - 1) : lo; }
    friend bool operator==(const AxisRange&, const AxisRange&) = default;
};

struct PhaseMap {
    std::vector<double> lambda_axis;
    std::vector<double> theta_axis;
    /// Row-major, one row per lambda.
    std::vector<double> gamma;

    double at(std::size_t i_lambda, std::size_t i_theta) const {
        return gamma[i_lambda * theta_axis.size() + i_theta];
    }
};

/// Loop phase over a (lambda, theta) lattice at R = rho_min of the cylindrical
/// case with the same (lambda, Omega). Rows run on up to `threads` workers.
PhaseMap phase_map(const ModelParams& base, const AxisRange& lambda_range, const AxisRange& theta_range,
                   const BerryOptions& opt = {}, int threads = 1);

} // namespace cavjt
