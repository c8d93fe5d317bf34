// observables.hpp - cavity-field observables extracted from grid snapshots:
// single-mode reduced density kernels, photon statistics, Husimi Q functions,
// densities, characteristic time scales and revival peaks.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cavjt/propagator.hpp"

namespace cavjt {

enum class FieldMode { A, B };

/// rho(x, x') of one cavity mode on the grid axis; trace = sum_i rho(x_i, x_i) dx.
struct ReducedMode {
    Eigen::MatrixXcd kernel;
    FieldMode mode = FieldMode::A;
    double trace = 0.0;
    GridSpec grid;

    std::vector<double> axis() const;
    double purity() const;
    /// Smallest eigenvalue of the kernel as a density matrix (kernel * dx).
    double min_eigenvalue() const;
};

/// Traces out the other mode and the spin. Throws NumericalGuardError if the
/// trace deviates from 1 by more than 1e-6.
ReducedMode reduce_mode(const SpinorField& s, FieldMode mode);
ReducedMode reduce_mode(const ScalarField& s, FieldMode mode);

struct PhotonStats {
    std::vector<double> p_n;
    double mean_n = 0.0;
    double parity_even_weight = 0.0;
    double truncation_loss = 0.0;

    double parity_odd_weight() const;
};

/// P(n) = <n|rho|n> by Hermite-function quadrature on the grid. Starting from
/// n_max, the Fock cutoff doubles until the missing weight drops below
/// `loss_target` or the grid can no longer resolve h_n; a final loss above 1e-6
/// raises TruncationError.
PhotonStats photon_statistics(const ReducedMode& r, int n_max, double loss_target = 1e-10);

/// (<x^2> + <p^2> - 1) / 2 straight from the kernel, p^2 applied spectrally.
double mean_photon_quadrature(const ReducedMode& r);

struct AlphaGrid {
    double re_lo = -1.0;
    double re_hi = 1.0;
    double im_lo = -1.0;
    double im_hi = 1.0;
    int n_re = 2;
    int n_im = 2;

    /// Square lattice of half-width sqrt(2 mean_n) + 4 around the origin.
    static AlphaGrid covering(double mean_n, int count);
    cplx at(int i_re, int i_im) const;
};

struct QFunction {
    AlphaGrid grid;
    /// Row-major over (i_re, i_im).
    std::vector<cplx> alpha;
    std::vector<double> q;
    /// Trapezoid estimate of the integral of Q over the lattice.
    double integral = 0.0;
};

/// Q(alpha) = <alpha|rho|alpha> / pi. `coarse` uses every second grid point.
QFunction husimi_q(const ReducedMode& r, const AlphaGrid& grid, bool coarse = false);
double husimi_q_at(const ReducedMode& r, cplx alpha);

/// |psi_e|^2 + |psi_g|^2 (or |psi|^2), integrating to 1 with weight dx^2.
std::vector<double> density_snapshot(const SpinorField& s);
std::vector<double> density_snapshot(const ScalarField& s);

/// Band-limited (trigonometric) interpolation of the density at off-grid points.
class DensityInterpolator {
public:
    explicit DensityInterpolator(const SpinorField& s);
    explicit DensityInterpolator(const ScalarField& s);

    double operator()(double x, double y) const;

private:
    void add_component(const Field2D& f);

    GridSpec grid_;
    std::vector<Field2D> spectra_;
};

struct TimeScales {
    double t_in = 0.0;
    double t_frac = 0.0;
    double t_rev = 0.0;
};

/// t_in = sqrt(4 pi^2 lambda^2 - 1), t_frac = lambda t_in, t_rev = 4 lambda t_in.
/// Throws std::invalid_argument for lambda < 1 / (2 pi).
TimeScales timescales(const ModelParams& p);

struct RevivalPeak {
    double t = 0.0;
    double value = 0.0;
};

/// Local maxima of `values` above `threshold`, refined by a parabola through the
/// three neighbouring samples. `times` must be uniformly spaced.
std::vector<RevivalPeak> find_peaks(std::span<const double> times, std::span<const double> values,
                                    double threshold = 0.5);

/// Peaks of |<Psi(0)|Psi(t)>| in a trajectory.
std::vector<RevivalPeak> revival_detector(const Trajectory& traj, double threshold = 0.5);

} // namespace cavjt
