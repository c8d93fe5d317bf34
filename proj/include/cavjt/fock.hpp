// fock.hpp - exact evolution in a truncated two-mode number basis, used as an
// independent check of the grid propagator.
//
// Ladder form of the quadrature Hamiltonian (x = (a + a^dagger)/sqrt 2):
//   H = a^dagger a + b^dagger b + 1 + (Omega/2) sz
//       + sqrt2 lambda (a + a^dagger)(e^{-i phi} s+ + e^{i phi} s-)
//       + sqrt2 lambda (b + b^dagger)(e^{-i theta} s+ + e^{i theta} s-)

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cavjt/propagator.hpp"

namespace cavjt {

/// Spin index: 0 = e (upper), 1 = g.
inline std::size_t fock_index(int n_cut, int na, int nb, int s) {
    return (static_cast<std::size_t>(na) * n_cut + nb) * 2 + s;
}

struct FockVector {
    int n_cut = 0;
    Eigen::VectorXcd amp;

    double norm() const { return amp.norm(); }
    /// Population with n_a or n_b in the top two shells.
    double leakage() const;
};

struct FockOperator {
    int n_cut = 0;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> matrix;
};

/// Throws ConfigError for n_cut < 2.
FockOperator build_hamiltonian(const ModelParams& p, int n_cut);

/// |alpha_a> |alpha_b> (spinor), renormalized after truncation. Throws ConfigError
/// when |alpha|^2 > n_cut / 4 for either mode.
FockVector coherent_state(cplx alpha_a, cplx alpha_b, std::array<cplx, 2> spinor, int n_cut);

struct EvolveOptions {
    int krylov_dim = 30;
    /// Local error bound per substep.
    double tolerance = 1e-12;
    /// Maximum top-two-shell population tolerated at the end of the run.
    double leakage_bound = 1e-6;
};

/// exp(-i H t) v by Lanczos with adaptive substeps. Throws TruncationError
/// when the leakage bound is exceeded.
FockVector evolve(const FockVector& v, const FockOperator& h, double t, const EvolveOptions& opt = {});

/// Same through a dense eigendecomposition; limited to dimension <= 2000.
FockVector evolve_dense(const FockVector& v, const FockOperator& h, double t);

struct FockExpectations {
    double n_a = 0.0;
    double n_b = 0.0;
    double sigma_z = 0.0;
};

FockExpectations expectations(const FockVector& v);

/// Hermite synthesis psi_s(x, y) = sum c(n_a, n_b, s) h_{n_a}(x) h_{n_b}(y).
SpinorField to_grid(const FockVector& v, const GridSpec& g);
/// Hermite analysis by quadrature on the grid.
FockVector from_grid(const SpinorField& s, int n_cut);

/// |<a|b>|^2.
double fidelity(const FockVector& a, const FockVector& b);
double fidelity(const SpinorField& a, const SpinorField& b);

struct OracleCase {
    ModelParams params;
    double x0 = 0.0;
    double y0 = 0.0;
    double t = 0.0;
    int n_cut = 24;
};

struct OracleResult {
    OracleCase instance;
    double fidelity = 0.0;
    FockExpectations fock;
    FockExpectations grid;
    double leakage = 0.0;
    bool passed = false;
};

struct OracleSettings {
    int grid_n = 128;
    double half_width = 10.0;
    double dt = 0.01;
    double min_fidelity = 0.999;

    friend bool operator==(const OracleSettings&, const OracleSettings&) = default;
};

/// Propagates the same initial state on the grid and in the Fock basis and compares.
OracleResult cross_validate(const OracleCase& c, const OracleSettings& s = {});

/// Reproducible small instances: lambda <= 0.7, |x0| <= 1.5 with y0 = 0, t <= 5,
/// random detuning and phases, t a multiple of 0.01.
std::vector<OracleCase> random_oracle_cases(int count, std::uint64_t seed, int n_cut = 24);

} // namespace cavjt
