#include "cavjt/fock.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cavjt/errors.hpp"
#include "cavjt/hermite.hpp"

namespace cavjt {

double FockVector::leakage() const {
    double sum = 0.0;
    for (int na = 0; na < n_cut; ++na)
        for (int nb = 0; nb < n_cut; ++nb) {
            if (na < n_cut - 2 && nb < n_cut - 2) continue;
            for (int s = 0; s < 2; ++s) sum += std::norm(amp(fock_index(n_cut, na, nb, s)));
        }
    return sum;
}

FockOperator build_hamiltonian(const ModelParams& p, int n_cut) {
    if (n_cut < 2) throw ConfigError("Fock truncation must be at least 2");
    const int dim = 2 * n_cut * n_cut;
    const double g = std::sqrt(2.0) * p.lambda();
    const cplx up_a = g * std::polar(1.0, -p.phi());
    const cplx up_b = g * std::polar(1.0, -p.theta());

    std::vector<Eigen::Triplet<cplx>> entries;
    entries.reserve(static_cast<std::size_t>(dim) * 5);
    auto couple = [&](std::size_t row, std::size_t col, cplx v) {
        entries.emplace_back(row, col, v);
        entries.emplace_back(col, row, std::conj(v));
    };
    for (int na = 0; na < n_cut; ++na)
        for (int nb = 0; nb < n_cut; ++nb) {
            const double base = na + nb + 1.0;
            const std::size_t e = fock_index(n_cut, na, nb, 0);
            const std::size_t gs = fock_index(n_cut, na, nb, 1);
            entries.emplace_back(e, e, base + 0.5 * p.omega_q());
            entries.emplace_back(gs, gs, base - 0.5 * p.omega_q());
            if (g == 0.0) continue;
            // <na+1, e| a^dagger s+ |na, g> and <na, e| a s+ |na+1, g>, plus hermitian partners.
            if (na + 1 < n_cut) {
                const double m = std::sqrt(na + 1.0);
                couple(fock_index(n_cut, na + 1, nb, 0), gs, m * up_a);
                couple(e, fock_index(n_cut, na + 1, nb, 1), m * up_a);
            }
            if (nb + 1 < n_cut) {
                const double m = std::sqrt(nb + 1.0);
                couple(fock_index(n_cut, na, nb + 1, 0), gs, m * up_b);
                couple(e, fock_index(n_cut, na, nb + 1, 1), m * up_b);
            }
        }
    FockOperator h;
    h.n_cut = n_cut;
    h.matrix.resize(dim, dim);
    h.matrix.setFromTriplets(entries.begin(), entries.end());
    return h;
}

namespace {

Eigen::VectorXcd coherent_amplitudes(cplx alpha, int n_cut) {
    Eigen::VectorXcd c(n_cut);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < n_cut; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c;
}

} // namespace

FockVector coherent_state(cplx alpha_a, cplx alpha_b, std::array<cplx, 2> spinor, int n_cut) {
    if (n_cut < 2) throw ConfigError("Fock truncation must be at least 2");
    const double limit = n_cut / 4.0;
    if (std::norm(alpha_a) > limit || std::norm(alpha_b) > limit) {
        std::ostringstream msg;
        msg << "coherent amplitude too large for truncation N = " << n_cut << " (|alpha|^2 must be <= N/4)";
        throw ConfigError(msg.str());
    }
    const Eigen::VectorXcd ca = coherent_amplitudes(alpha_a, n_cut);
    const Eigen::VectorXcd cb = coherent_amplitudes(alpha_b, n_cut);
    FockVector v;
    v.n_cut = n_cut;
    v.amp.resize(2 * n_cut * n_cut);
    for (int na = 0; na < n_cut; ++na)
        for (int nb = 0; nb < n_cut; ++nb)
            for (int s = 0; s < 2; ++s) v.amp(fock_index(n_cut, na, nb, s)) = ca(na) * cb(nb) * spinor[s];
    const double norm = v.amp.norm();
    if (norm == 0.0) throw ConfigError("coherent_state: zero spinor");
    v.amp /= norm;
    return v;
}

namespace {

// One Lanczos substep of length tau. Returns false if the error estimate is too large.
bool lanczos_step(const FockOperator& h, Eigen::VectorXcd& v, double tau, int m, double tol) {
    const Eigen::Index dim = v.size();
    const double beta0 = v.norm();
    m = static_cast<int>(std::min<Eigen::Index>(m, dim));
    Eigen::MatrixXcd basis(dim, m + 1);
    Eigen::VectorXd alpha(m), beta(m + 1);
    basis.col(0) = v / beta0;
    int used = m;
    double beta_last = 0.0;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXcd w = h.matrix * basis.col(j);
        alpha(j) = basis.col(j).dot(w).real();
        // Full reorthogonalization; the Krylov spaces here are tiny.
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k <= j; ++k) w -= basis.col(k) * basis.col(k).dot(w);
        const double b = w.norm();
        beta(j + 1) = b;
        if (b < 1e-14 * beta0 + 1e-300) {
            used = j + 1;
            beta_last = 0.0;
            break;
        }
        basis.col(j + 1) = w / b;
        beta_last = b;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (int j = 0; j < used; ++j) {
        t(j, j) = alpha(j);
        if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j + 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::MatrixXd& q = es.eigenvectors();
    Eigen::VectorXcd phase(used);
    for (int k = 0; k < used; ++k) phase(k) = std::polar(q(0, k), -tau * es.eigenvalues()(k));
    const Eigen::VectorXcd y = q.cast<cplx>() * phase;
    const double err = beta_last * std::abs(y(used - 1));
    if (err > tol) return false;
    v = beta0 * (basis.leftCols(used) * y);
    return true;
}

void check_leakage(const FockVector& v, double bound) {
    const double leak = v.leakage();
    if (leak > bound) {
        std::ostringstream msg;
        msg << "Fock truncation N = " << v.n_cut << " leaks " << leak << " into the top shells; rerun with N >= "
            << 2 * v.n_cut;
        throw TruncationError(msg.str(), leak);
    }
}

} // namespace

FockVector evolve(const FockVector& v, const FockOperator& h, double t, const EvolveOptions& opt) {
    if (v.n_cut != h.n_cut) throw std::invalid_argument("evolve: truncation mismatch");
    FockVector out = v;
    double remaining = t;
    double tau = std::abs(t) > 0 ? std::min(std::abs(t), 1.0) : 0.0;
    const double sign = t < 0 ? -1.0 : 1.0;
    while (remaining * sign > 0.0) {
        tau = std::min(tau, remaining * sign);
        Eigen::VectorXcd trial = out.amp;
        if (lanczos_step(h, trial, sign * tau, opt.krylov_dim, opt.tolerance)) {
            out.amp = trial;
            remaining -= sign * tau;
            tau *= 1.5;
        } else {
            tau *= 0.5;
            if (tau < 1e-10) throw ConvergenceError("Lanczos substep collapsed", tau, 2 * tau);
        }
    }
    check_leakage(out, opt.leakage_bound);
    return out;
}

FockVector evolve_dense(const FockVector& v, const FockOperator& h, double t) {
    if (v.n_cut != h.n_cut) throw std::invalid_argument("evolve_dense: truncation mismatch");
    if (h.matrix.rows() > 2000) throw std::invalid_argument("evolve_dense: dimension above 2000");
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    const Eigen::VectorXcd coeff = es.eigenvectors().adjoint() * v.amp;
    Eigen::VectorXcd phased(coeff.size());
    for (Eigen::Index k = 0; k < coeff.size(); ++k) phased(k) = coeff(k) * std::polar(1.0, -t * es.eigenvalues()(k));
    FockVector out{v.n_cut, es.eigenvectors() * phased};
    return out;
}

FockExpectations expectations(const FockVector& v) {
    FockExpectations e;
    for (int na = 0; na < v.n_cut; ++na)
        for (int nb = 0; nb < v.n_cut; ++nb) {
            const double pe = std::norm(v.amp(fock_index(v.n_cut, na, nb, 0)));
            const double pg = std::norm(v.amp(fock_index(v.n_cut, na, nb, 1)));
            e.n_a += na * (pe + pg);
            e.n_b += nb * (pe + pg);
            e.sigma_z += pe - pg;
        }
    return e;
}

namespace {

using RowMajorC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd grid_table(int n_cut, const GridSpec& g) {
    std::vector<double> x(g.n());
    for (int i = 0; i < g.n(); ++i) x[i] = g.coord(i);
    return hermite_table(n_cut, x);
}

} // namespace

SpinorField to_grid(const FockVector& v, const GridSpec& g) {
    const Eigen::MatrixXcd h = grid_table(v.n_cut, g).cast<cplx>();
    SpinorField s{g, Field2D(g.size()), Field2D(g.size()), 0.0};
    for (int spin = 0; spin < 2; ++spin) {
        Eigen::MatrixXcd c(v.n_cut, v.n_cut);
        for (int na = 0; na < v.n_cut; ++na)
            for (int nb = 0; nb < v.n_cut; ++nb) c(na, nb) = v.amp(fock_index(v.n_cut, na, nb, spin));
        const RowMajorC psi = h.transpose() * c * h;
        Field2D& dst = spin == 0 ? s.psi_e : s.psi_g;
        std::copy(psi.data(), psi.data() + psi.size(), dst.begin());
    }
    return s;
}

FockVector from_grid(const SpinorField& s, int n_cut) {
    if (n_cut < 2) throw ConfigError("Fock truncation must be at least 2");
    const Eigen::MatrixXcd h = grid_table(n_cut, s.grid).cast<cplx>();
    const int n = s.grid.n();
    const double w = s.grid.dx() * s.grid.dx();
    FockVector v;
    v.n_cut = n_cut;
    v.amp.resize(2 * n_cut * n_cut);
    for (int spin = 0; spin < 2; ++spin) {
        const Field2D& src = spin == 0 ? s.psi_e : s.psi_g;
        Eigen::Map<const RowMajorC> psi(src.data(), n, n);
        const Eigen::MatrixXcd c = h * psi * h.transpose() * w;
        for (int na = 0; na < n_cut; ++na)
            for (int nb = 0; nb < n_cut; ++nb) v.amp(fock_index(n_cut, na, nb, spin)) = c(na, nb);
    }
    return v;
}

double fidelity(const FockVector& a, const FockVector& b) {
    if (a.n_cut != b.n_cut) throw std::invalid_argument("fidelity: truncation mismatch");
    return std::norm(a.amp.dot(b.amp));
}

double fidelity(const SpinorField& a, const SpinorField& b) { return std::norm(inner_product(a, b)); }

OracleResult cross_validate(const OracleCase& c, const OracleSettings& s) {
    const GridSpec g(s.grid_n, s.half_width);
    PropagationConfig cfg;
    cfg.dt = s.dt;
    cfg.t_final = c.t;
    cfg.record_stride = std::max<long>(1, cfg.steps());
    cfg.mode = PropagationMode::Full;
    cfg.snapshot_times = {c.t};
    const SpinorField start = initial_state(c.params, g, c.x0, c.y0);
    const Trajectory traj = propagate(start, c.params, cfg);
    const SpinorField& grid_end = std::get<SpinorField>(traj.snapshots.back());

    const double inv = 1.0 / std::sqrt(2.0);
    const FockVector f0 =
        coherent_state(cplx(c.x0 * inv, 0.0), cplx(c.y0 * inv, 0.0), {cplx(inv, 0.0), cplx(-inv, 0.0)}, c.n_cut);
    const FockOperator h = build_hamiltonian(c.params, c.n_cut);
    const FockVector f1 = evolve(f0, h, c.t);

    OracleResult r;
    r.instance = c;
    r.fock = expectations(f1);
    r.leakage = f1.leakage();
    const FockVector projected = from_grid(grid_end, c.n_cut);
    r.grid = expectations(projected);
    r.fidelity = fidelity(grid_end, to_grid(f1, g));
    r.passed = r.fidelity >= s.min_fidelity;
    return r;
}

std::vector<OracleCase> random_oracle_cases(int count, std::uint64_t seed, int n_cut) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lam(0.05, 0.7);
    std::uniform_real_distribution<double> omega(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> shift(-1.5, 1.5);
    std::uniform_int_distribution<int> steps(50, 500);
    std::vector<OracleCase> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        OracleCase c;
        const double l = lam(rng);
        const double o = omega(rng);
        const double ph = phase(rng);
        const double th = phase(rng);
        c.params = ModelParams(l, o, ph, th);
        c.x0 = shift(rng);
        c.t = steps(rng) * 0.01;
        c.n_cut = n_cut;
        out.push_back(c);
    }
    return out;
}

} // namespace cavjt
