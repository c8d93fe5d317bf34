#include "cavjt/observables.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cavjt/errors.hpp"
#include "cavjt/hermite.hpp"

namespace cavjt {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void accumulate_kernel(Eigen::MatrixXcd& kernel, const GridSpec& g, const Field2D& f, FieldMode mode) {
    RowMajorMap psi(f.data(), g.n(), g.n());
    if (mode == FieldMode::A)
        kernel.noalias() += psi * psi.adjoint();
    else
        kernel.noalias() += psi.transpose() * psi.conjugate();
}

ReducedMode finish(Eigen::MatrixXcd kernel, const GridSpec& g, FieldMode mode) {
    kernel *= g.dx();
    ReducedMode r;
    r.mode = mode;
    r.grid = g;
    r.trace = kernel.diagonal().real().sum() * g.dx();
    r.kernel = std::move(kernel);
    if (std::abs(r.trace - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "reduced density trace " << r.trace << " deviates from 1";
        throw NumericalGuardError(msg.str());
    }
    return r;
}

} // namespace

std::vector<double> ReducedMode::axis() const {
    std::vector<double> x(grid.n());
    for (int i = 0; i < grid.n(); ++i) x[i] = grid.coord(i);
    return x;
}

double ReducedMode::purity() const {
    return kernel.cwiseAbs2().sum() * grid.dx() * grid.dx();
}

double ReducedMode::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kernel * grid.dx(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

ReducedMode reduce_mode(const SpinorField& s, FieldMode mode) {
    Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Zero(s.grid.n(), s.grid.n());
    accumulate_kernel(kernel, s.grid, s.psi_e, mode);
    accumulate_kernel(kernel, s.grid, s.psi_g, mode);
    return finish(std::move(kernel), s.grid, mode);
}

ReducedMode reduce_mode(const ScalarField& s, FieldMode mode) {
    Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Zero(s.grid.n(), s.grid.n());
    accumulate_kernel(kernel, s.grid, s.psi, mode);
    return finish(std::move(kernel), s.grid, mode);
}

double PhotonStats::parity_odd_weight() const {
    double s = 0.0;
    for (std::size_t n = 1; n < p_n.size(); n += 2) s += p_n[n];
    return s;
}

namespace {

// Largest Fock index whose Hermite function (turning point sqrt(2n+1)) still sits
// three widths inside both the position window and the momentum window.
int resolvable_fock_limit(const GridSpec& g) {
    const double window = std::min(g.half_width(), kPi / g.dx()) - 3.0;
    if (window <= 1.0) return 1;
    return static_cast<int>((window * window - 1.0) / 2.0);
}

PhotonStats project(const ReducedMode& r, int count) {
    const auto x = r.axis();
    const Eigen::MatrixXd h = hermite_table(count, x);
    const Eigen::MatrixXcd m = h.cast<cplx>() * r.kernel;
    const double w = r.grid.dx() * r.grid.dx();
    PhotonStats st;
    st.p_n.resize(count);
    double total = 0.0;
    for (int n = 0; n < count; ++n) {
        const double p = (m.row(n).transpose().cwiseProduct(h.row(n).transpose().cast<cplx>())).sum().real() * w;
        st.p_n[n] = p;
        total += p;
        st.mean_n += n * p;
        if (n % 2 == 0) st.parity_even_weight += p;
    }
    st.truncation_loss = r.trace - total;
    return st;
}

} // namespace

PhotonStats photon_statistics(const ReducedMode& r, int n_max, double loss_target) {
    if (n_max < 1) throw std::invalid_argument("photon_statistics: n_max must be >= 1");
    const int limit = std::max(resolvable_fock_limit(r.grid), 1);
    int count = std::min(n_max, limit);
    PhotonStats st = project(r, count);
    while (st.truncation_loss > loss_target && count < limit) {
        count = std::min(2 * count, limit);
        st = project(r, count);
    }
    if (st.truncation_loss > 1e-6) {
        std::ostringstream msg;
        msg << "photon statistics truncated at n = " << count << " lose " << st.truncation_loss
            << " of the weight; enlarge the grid";
        throw TruncationError(msg.str(), st.truncation_loss);
    }
    return st;
}

double mean_photon_quadrature(const ReducedMode& r) {
    const int n = r.grid.n();
    const double dx = r.grid.dx();
    double x2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.grid.coord(i);
        x2 += x * x * r.kernel(i, i).real();
    }
    x2 *= dx;

    // Unitary DFT U; <p^2> = sum_k k^2 (U D U^dagger)_kk with D = kernel dx.
    Eigen::MatrixXcd u(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) u(k, i) = std::polar(scale, -kTwoPi * static_cast<double>(k) * i / n);
    const Eigen::MatrixXcd ud = u * (r.kernel * dx);
    double p2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double kk = r.grid.wavenumber(k);
        p2 += kk * kk * ud.row(k).dot(u.row(k)).real();
    }
    return 0.5 * (x2 + p2 - r.trace);
}

AlphaGrid AlphaGrid::covering(double mean_n, int count) {
    const double radius = std::sqrt(2.0 * std::max(mean_n, 0.0)) + 4.0;
    return {-radius, radius, -radius, radius, count, count};
}

cplx AlphaGrid::at(int i_re, int i_im) const {
    const double re = n_re > 1 ? re_lo + (re_hi - re_lo) * i_re / (n_re - 1) : re_lo;
    const double im = n_im > 1 ? im_lo + (im_hi - im_lo) * i_im / (n_im - 1) : im_lo;
    return {re, im};
}

namespace {

Eigen::VectorXcd coherent_profile(std::span<const double> x, cplx alpha) {
    Eigen::VectorXcd c(static_cast<Eigen::Index>(x.size()));
    const double x0 = std::sqrt(2.0) * alpha.real();
    const double p0 = std::sqrt(2.0) * alpha.imag();
    const double norm = std::pow(kPi, -0.25);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x0;
        c(static_cast<Eigen::Index>(i)) = std::polar(norm * std::exp(-0.5 * d * d), p0 * x[i]);
    }
    return c;
}

} // namespace

double husimi_q_at(const ReducedMode& r, cplx alpha) {
    const auto x = r.axis();
    const Eigen::VectorXcd c = coherent_profile(x, alpha);
    const double w = r.grid.dx() * r.grid.dx();
    return c.dot(r.kernel * c).real() * w / kPi;
}

QFunction husimi_q(const ReducedMode& r, const AlphaGrid& grid, bool coarse) {
    if (grid.n_re < 1 || grid.n_im < 1) throw std::invalid_argument("husimi_q: empty alpha grid");
    const int stride = coarse ? 2 : 1;
    std::vector<double> x;
    for (int i = 0; i < r.grid.n(); i += stride) x.push_back(r.grid.coord(i));
    const Eigen::Index m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXcd kernel(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) kernel(i, j) = r.kernel(i * stride, j * stride);
    const double step = r.grid.dx() * stride;

    QFunction out;
    out.grid = grid;
    const int total = grid.n_re * grid.n_im;
    out.alpha.resize(total);
    out.q.resize(total);
    Eigen::MatrixXcd states(m, total);
    for (int a = 0; a < grid.n_re; ++a)
        for (int b = 0; b < grid.n_im; ++b) {
            const int idx = a * grid.n_im + b;
            out.alpha[idx] = grid.at(a, b);
            states.col(idx) = coherent_profile(x, out.alpha[idx]);
        }
    const Eigen::MatrixXcd applied = kernel * states;
    for (int idx = 0; idx < total; ++idx)
        out.q[idx] = states.col(idx).dot(applied.col(idx)).real() * step * step / kPi;

    const double hre = grid.n_re > 1 ? (grid.re_hi - grid.re_lo) / (grid.n_re - 1) : 0.0;
    const double him = grid.n_im > 1 ? (grid.im_hi - grid.im_lo) / (grid.n_im - 1) : 0.0;
    double integral = 0.0;
    for (int a = 0; a < grid.n_re; ++a)
        for (int b = 0; b < grid.n_im; ++b) {
            const double wa = (a == 0 || a == grid.n_re - 1) ? 0.5 : 1.0;
            const double wb = (b == 0 || b == grid.n_im - 1) ? 0.5 : 1.0;
            integral += wa * wb * out.q[a * grid.n_im + b];
        }
    out.integral = integral * hre * him;
    return out;
}

std::vector<double> density_snapshot(const SpinorField& s) {
    std::vector<double> d(s.psi_e.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(s.psi_e[i]) + std::norm(s.psi_g[i]);
    return d;
}

std::vector<double> density_snapshot(const ScalarField& s) {
    std::vector<double> d(s.psi.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(s.psi[i]);
    return d;
}

DensityInterpolator::DensityInterpolator(const SpinorField& s) : grid_(s.grid) {
    add_component(s.psi_e);
    add_component(s.psi_g);
}

DensityInterpolator::DensityInterpolator(const ScalarField& s) : grid_(s.grid) { add_component(s.psi); }

void DensityInterpolator::add_component(const Field2D& f) {
    Fft2D fft(grid_.n());
    Field2D spec = f;
    fft.forward(spec);
    spectra_.push_back(std::move(spec));
}

double DensityInterpolator::operator()(double x, double y) const {
    const int n = grid_.n();
    const double ux = x + grid_.half_width();
    const double uy = y + grid_.half_width();
    // Nyquist bin enters as a cosine so that the interpolant stays real for real data.
    std::vector<cplx> ex(n), ey(n);
    for (int k = 0; k < n; ++k) {
        const double kk = grid_.wavenumber(k);
        if (2 * k == n) {
            ex[k] = std::cos(kk * ux);
            ey[k] = std::cos(kk * uy);
        } else {
            ex[k] = std::polar(1.0, kk * ux);
            ey[k] = std::polar(1.0, kk * uy);
        }
    }
    const double norm = 1.0 / (static_cast<double>(n) * n);
    double density = 0.0;
    for (const auto& spec : spectra_) {
        cplx value{};
        for (int kx = 0; kx < n; ++kx) {
            cplx row{};
            for (int ky = 0; ky < n; ++ky) row += spec[grid_.index(kx, ky)] * ey[ky];
            value += ex[kx] * row;
        }
        density += std::norm(value * norm);
    }
    return density;
}

TimeScales timescales(const ModelParams& p) {
    const double lam = p.lambda();
    const double arg = 4.0 * kPi * kPi * lam * lam - 1.0;
    if (arg < -1e-12) throw std::invalid_argument("timescales: lambda must be >= 1/(2 pi)");
    TimeScales ts;
    ts.t_in = std::sqrt(std::max(arg, 0.0));
    ts.t_frac = lam * ts.t_in;
    ts.t_rev = 4.0 * lam * ts.t_in;
    return ts;
}

std::vector<RevivalPeak> find_peaks(std::span<const double> times, std::span<const double> values, double threshold) {
    std::vector<RevivalPeak> peaks;
    if (times.size() != values.size()) throw std::invalid_argument("find_peaks: size mismatch");
    for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        const double a = values[k - 1];
        const double b = values[k];
        const double c = values[k + 1];
        if (!(b > a && b >= c && b >= threshold)) continue;
        const double h = times[k + 1] - times[k];
        const double curv = a - 2.0 * b + c;
        double offset = 0.0;
        if (curv < 0.0) offset = std::clamp(0.5 * (a - c) / curv, -0.5, 0.5);
        peaks.push_back({times[k] + offset * h, b - 0.25 * (a - c) * offset});
    }
    return peaks;
}

std::vector<RevivalPeak> revival_detector(const Trajectory& traj, double threshold) {
    std::vector<double> t, v;
    t.reserve(traj.records.size());
    v.reserve(traj.records.size());
    for (const auto& r : traj.records) {
        t.push_back(r.t);
        v.push_back(std::abs(r.autocorr));
    }
    return find_peaks(t, v, threshold);
}

} // namespace cavjt
