// propagator.hpp - symmetric split-operator propagation of wave packets on the
// quadrature grid, either under the full two-surface Hamiltonian or under the
// scalar semi-adiabatic Hamiltonian T + V_-.

#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "cavjt/grid.hpp"
#include "cavjt/model.hpp"

namespace cavjt {

enum class PropagationMode { Full, SemiAdiabatic };

std::string to_string(PropagationMode mode);
/// Accepts "full" and "semi" / "semi_adiabatic"; throws ConfigError otherwise.
PropagationMode parse_mode(const std::string& text);

/// Two-component amplitude on the grid: psi_e (upper) and psi_g (lower diabatic state).
struct SpinorField {
    GridSpec grid;
    Field2D psi_e;
    Field2D psi_g;
    double t = 0.0;
};

/// Spatial amplitude propagated by the semi-adiabatic Hamiltonian.
struct ScalarField {
    GridSpec grid;
    Field2D psi;
    double t = 0.0;
};

using Snapshot = std::variant<SpinorField, ScalarField>;

struct PropagationConfig {
    double dt = 0.01;
    double t_final = 0.0;
    /// Keep a snapshot every this many steps (0 disables).
    int snapshot_stride = 0;
    /// Scalar records every this many steps; 1 records every step.
    int record_stride = 1;
    PropagationMode mode = PropagationMode::Full;
    /// Extra snapshots, each taken at the step nearest the requested time.
    std::vector<double> snapshot_times;
    /// Abort when |norm - 1| exceeds this.
    double norm_guard = 1e-6;
    /// Abort when the probability within two cells of the boundary exceeds this.
    double boundary_guard = 1e-8;

    /// Number of steps; throws ConfigError unless t_final is a multiple of dt.
    long steps() const;
    void validate() const;
};

struct ScalarRecord {
    double t = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    /// NaN in semi-adiabatic mode (no spin).
    double sigma_z = 0.0;
    /// <Psi(0)|Psi(t)>.
    cplx autocorr{};
    /// Overlap with the initial state rotated by pi in both field phases (x, y) -> (-x, -y).
    cplx autocorr_rotated{};
    /// Weight on the local upper adiabatic state (full mode only).
    double upper_population = 0.0;
    double boundary_probability = 0.0;
};

struct Trajectory {
    PropagationMode mode = PropagationMode::Full;
    ModelParams params;
    double dt = 0.0;
    std::vector<ScalarRecord> records;
    std::vector<Snapshot> snapshots;
};

/// Gaussian of unit width centred at (x0, y0) times the spinor (1, -1)/sqrt(2),
/// normalized on the grid. Throws ConfigError if the packet is closer than five
/// widths to the grid edge.
SpinorField initial_state(const ModelParams& p, const GridSpec& g, double x0, double y0);

/// The spatial factor of initial_state, used as the semi-adiabatic starting state.
ScalarField initial_scalar_state(const GridSpec& g, double x0, double y0);

/// exp(-i V dt/2) exp(-i T dt) exp(-i V dt/2) with the 2x2 potential exponentiated
/// exactly through its Pauli decomposition.
class FullPropagator {
public:
    FullPropagator(const ModelParams& p, const GridSpec& g, double dt);
    ~FullPropagator();
    FullPropagator(FullPropagator&&) noexcept;
    FullPropagator& operator=(FullPropagator&&) noexcept;

    void step(SpinorField& s);
    ScalarRecord measure(const SpinorField& s, const SpinorField& initial);
    double energy(const SpinorField& s);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Same splitting for the scalar Hamiltonian T + V_-(x, y).
class SemiAdiabaticPropagator {
public:
    SemiAdiabaticPropagator(const ModelParams& p, const GridSpec& g, double dt);
    ~SemiAdiabaticPropagator();
    SemiAdiabaticPropagator(SemiAdiabaticPropagator&&) noexcept;
    SemiAdiabaticPropagator& operator=(SemiAdiabaticPropagator&&) noexcept;

    void step(ScalarField& s);
    ScalarRecord measure(const ScalarField& s, const ScalarField& initial);
    double energy(const ScalarField& s);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Single steps; build a propagator once instead when stepping repeatedly.
SpinorField step_full(SpinorField s, const ModelParams& p, double dt);
ScalarField step_semi_adiabatic(ScalarField s, const ModelParams& p, double dt);

/// Runs cfg.steps() steps. Throws NumericalGuardError when the norm or
/// boundary guard trips. cfg.mode must match the field type.
Trajectory propagate(const SpinorField& s0, const ModelParams& p, const PropagationConfig& cfg);
Trajectory propagate(const ScalarField& s0, const ModelParams& p, const PropagationConfig& cfg);

/// Inner product sum conj(a) b dx^2 over all components.
cplx inner_product(const SpinorField& a, const SpinorField& b);
cplx inner_product(const ScalarField& a, const ScalarField& b);
double norm_squared(const SpinorField& s);
double norm_squared(const ScalarField& s);

} // namespace cavjt
