#include "cavjt/propagator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cavjt/errors.hpp"

namespace cavjt {

std::string to_string(PropagationMode mode) {
    return mode == PropagationMode::Full ? "full" : "semi";
}

PropagationMode parse_mode(const std::string& text) {
    if (text == "full") return PropagationMode::Full;
    if (text == "semi" || text == "semi_adiabatic") return PropagationMode::SemiAdiabatic;
    throw ConfigError("unknown propagation mode '" + text + "' (expected full or semi)");
}

long PropagationConfig::steps() const {
    const double ratio = t_final / dt;
    const long n = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "t_final = " << t_final << " is not a multiple of dt = " << dt;
        throw ConfigError(msg.str());
    }
    return n;
}

void PropagationConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be >= 0");
    if (snapshot_stride < 0) throw ConfigError("snapshot_stride must be >= 0");
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    for (double t : snapshot_times)
        if (!(t >= 0.0) || t > t_final + 0.5 * dt) throw ConfigError("snapshot time outside [0, t_final]");
    (void)steps();
}

namespace {

void check_packet_fits(const GridSpec& g, double x0, double y0) {
    const double limit = g.half_width() - 5.0;
    if (std::abs(x0) > limit || std::abs(y0) > limit) {
        std::ostringstream msg;
        msg << "initial packet at (" << x0 << ", " << y0 << ") does not fit: |x0|, |y0| must be <= "
            << limit;
        throw ConfigError(msg.str());
    }
}

Field2D gaussian(const GridSpec& g, double x0, double y0) {
    Field2D f(g.size());
    double sum = 0.0;
    for (int ix = 0; ix < g.n(); ++ix) {
        const double dx = g.coord(ix) - x0;
        for (int iy = 0; iy < g.n(); ++iy) {
            const double dy = g.coord(iy) - y0;
            const double v = std::exp(-0.5 * (dx * dx + dy * dy)) / std::sqrt(kPi);
            f[g.index(ix, iy)] = v;
            sum += v * v;
        }
    }
    const double scale = 1.0 / std::sqrt(sum * g.dx() * g.dx());
    for (auto& v : f) v *= scale;
    return f;
}

double sum_norm(const Field2D& f) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return s;
}

cplx sum_overlap(const Field2D& a, const Field2D& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// Overlap with a pointwise-inverted copy of `a`.
cplx sum_overlap_rotated(const GridSpec& g, const Field2D& a, const Field2D& b) {
    cplx s{};
    for (int ix = 0; ix < g.n(); ++ix)
        for (int iy = 0; iy < g.n(); ++iy)
            s += std::conj(a[g.index(g.mirror(ix), g.mirror(iy))]) * b[g.index(ix, iy)];
    return s;
}

struct PositionMoments {
    double x2 = 0.0;
    double y2 = 0.0;
    double edge = 0.0;
};

void accumulate_position(const GridSpec& g, const Field2D& f, PositionMoments& m) {
    const int n = g.n();
    for (int ix = 0; ix < n; ++ix) {
        const double x = g.coord(ix);
        const bool x_edge = ix < 2 || ix >= n - 2;
        for (int iy = 0; iy < n; ++iy) {
            const double y = g.coord(iy);
            const double w = std::norm(f[g.index(ix, iy)]);
            m.x2 += x * x * w;
            m.y2 += y * y * w;
            if (x_edge || iy < 2 || iy >= n - 2) m.edge += w;
        }
    }
}

// Spectral kinetic factor and momentum moments.
class Kinetic {
public:
    Kinetic(const GridSpec& g, double dt) : grid_(g), fft_(g.n()), phase_(g.size()), k2_(g.n()), scratch_(g.size()) {
        const int n = g.n();
        for (int i = 0; i < n; ++i) {
            const double k = g.wavenumber(i);
            k2_[i] = k * k;
        }
        const double norm = 1.0 / (static_cast<double>(n) * n);
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                phase_[g.index(ix, iy)] = std::polar(norm, -0.5 * (k2_[ix] + k2_[iy]) * dt);
    }

    void apply(Field2D& f) const {
        fft_.forward(f);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= phase_[i];
        fft_.backward(f);
    }

    // Adds sum |psi_k|^2 kx^2 and ky^2, scaled so that a normalized field gives <px^2>, <py^2>.
    void accumulate_momentum(const Field2D& f, double& px2, double& py2) {
        scratch_ = f;
        fft_.forward(scratch_);
        const int n = grid_.n();
        const double dx = grid_.dx();
        const double scale = dx * dx / (static_cast<double>(n) * n);
        double sx = 0.0;
        double sy = 0.0;
        for (int ix = 0; ix < n; ++ix) {
            for (int iy = 0; iy < n; ++iy) {
                const double w = std::norm(scratch_[grid_.index(ix, iy)]);
                sx += k2_[ix] * w;
                sy += k2_[iy] * w;
            }
        }
        px2 += sx * scale;
        py2 += sy * scale;
    }

private:
    GridSpec grid_;
    Fft2D fft_;
    std::vector<cplx> phase_;
    std::vector<double> k2_;
    Field2D scratch_;
};

struct HalfStep {
    cplx u11, u12, u21, u22;
};

HalfStep potential_exponential(const PotentialMatrix& v, double tau) {
    const double a = 0.5 * (v.v11 + v.v22);
    const double bz = 0.5 * (v.v11 - v.v22);
    const double b = std::sqrt(bz * bz + std::norm(v.v12));
    const double c = std::cos(b * tau);
    const double s_over_b = b > 0.0 ? std::sin(b * tau) / b : tau;
    const cplx global = std::polar(1.0, -a * tau);
    const cplx i{0.0, 1.0};
    return {global * (c - i * s_over_b * bz), global * (-i * s_over_b * v.v12),
            global * (-i * s_over_b * std::conj(v.v12)), global * (c + i * s_over_b * bz)};
}

} // namespace

SpinorField initial_state(const ModelParams&, const GridSpec& g, double x0, double y0) {
    check_packet_fits(g, x0, y0);
    Field2D f = gaussian(g, x0, y0);
    SpinorField s{g, f, f, 0.0};
    const double r = 1.0 / std::sqrt(2.0);
    for (auto& v : s.psi_e) v *= r;
    for (auto& v : s.psi_g) v *= -r;
    return s;
}

ScalarField initial_scalar_state(const GridSpec& g, double x0, double y0) {
    check_packet_fits(g, x0, y0);
    return ScalarField{g, gaussian(g, x0, y0), 0.0};
}

cplx inner_product(const SpinorField& a, const SpinorField& b) {
    const double w = a.grid.dx() * a.grid.dx();
    return (sum_overlap(a.psi_e, b.psi_e) + sum_overlap(a.psi_g, b.psi_g)) * w;
}

cplx inner_product(const ScalarField& a, const ScalarField& b) {
    return sum_overlap(a.psi, b.psi) * (a.grid.dx() * a.grid.dx());
}

double norm_squared(const SpinorField& s) {
    return (sum_norm(s.psi_e) + sum_norm(s.psi_g)) * s.grid.dx() * s.grid.dx();
}

double norm_squared(const ScalarField& s) { return sum_norm(s.psi) * s.grid.dx() * s.grid.dx(); }

// ---------------------------------------------------------------------------
// Full two-surface propagation

struct FullPropagator::Impl {
    struct UpperState {
        double c1;
        cplx c2;
    };

    Impl(const ModelParams& p, const GridSpec& g, double dt_) : grid(g), dt(dt_), kinetic(g, dt_) {
        half.resize(g.size());
        potential.resize(g.size());
        upper.resize(g.size());
        for (int ix = 0; ix < g.n(); ++ix) {
            for (int iy = 0; iy < g.n(); ++iy) {
                const std::size_t idx = g.index(ix, iy);
                const PotentialMatrix v = diabatic_potential(p, g.coord(ix), g.coord(iy));
                potential[idx] = v;
                half[idx] = potential_exponential(v, 0.5 * dt);
                const double h = 0.5 * (v.v11 - v.v22);
                const double r = std::sqrt(h * h + std::norm(v.v12));
                const double a = h + r;
                const double len = std::sqrt(a * a + std::norm(v.v12));
                upper[idx] = len > 0.0 ? UpperState{a / len, std::conj(v.v12) / len} : UpperState{1.0, 0.0};
            }
        }
    }

    void apply_half(SpinorField& s) const {
        for (std::size_t i = 0; i < half.size(); ++i) {
            const cplx e = s.psi_e[i];
            const cplx g = s.psi_g[i];
            const HalfStep& u = half[i];
            s.psi_e[i] = u.u11 * e + u.u12 * g;
            s.psi_g[i] = u.u21 * e + u.u22 * g;
        }
    }

    void step(SpinorField& s) {
        apply_half(s);
        kinetic.apply(s.psi_e);
        kinetic.apply(s.psi_g);
        apply_half(s);
        s.t += dt;
    }

    double potential_energy(const SpinorField& s) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < potential.size(); ++i) {
            const PotentialMatrix& v = potential[i];
            const cplx e = s.psi_e[i];
            const cplx g = s.psi_g[i];
            sum += v.v11 * std::norm(e) + v.v22 * std::norm(g) + 2.0 * std::real(std::conj(e) * v.v12 * g);
        }
        return sum * grid.dx() * grid.dx();
    }

    ScalarRecord measure(const SpinorField& s, const SpinorField& initial) {
        const double w = grid.dx() * grid.dx();
        ScalarRecord r;
        r.t = s.t;
        const double ne = sum_norm(s.psi_e) * w;
        const double ng = sum_norm(s.psi_g) * w;
        r.norm = ne + ng;
        r.sigma_z = ne - ng;

        PositionMoments pos;
        accumulate_position(grid, s.psi_e, pos);
        accumulate_position(grid, s.psi_g, pos);
        double px2 = 0.0;
        double py2 = 0.0;
        kinetic.accumulate_momentum(s.psi_e, px2, py2);
        kinetic.accumulate_momentum(s.psi_g, px2, py2);
        r.n_a = 0.5 * (pos.x2 * w + px2 - r.norm);
        r.n_b = 0.5 * (pos.y2 * w + py2 - r.norm);
        r.energy = 0.5 * (px2 + py2) + potential_energy(s);
        r.boundary_probability = pos.edge * w;

        r.autocorr = inner_product(initial, s);
        r.autocorr_rotated = (sum_overlap_rotated(grid, initial.psi_e, s.psi_e)
                              + sum_overlap_rotated(grid, initial.psi_g, s.psi_g)) * w;
        double up = 0.0;
        for (std::size_t i = 0; i < upper.size(); ++i)
            up += std::norm(upper[i].c1 * s.psi_e[i] + std::conj(upper[i].c2) * s.psi_g[i]);
        r.upper_population = up * w;
        return r;
    }

    GridSpec grid;
    double dt;
    Kinetic kinetic;
    std::vector<HalfStep> half;
    std::vector<PotentialMatrix> potential;
    std::vector<UpperState> upper;
};

FullPropagator::FullPropagator(const ModelParams& p, const GridSpec& g, double dt)
    : impl_(std::make_unique<Impl>(p, g, dt)) {}
FullPropagator::~FullPropagator() = default;
FullPropagator::FullPropagator(FullPropagator&&) noexcept = default;
FullPropagator& FullPropagator::operator=(FullPropagator&&) noexcept = default;

void FullPropagator::step(SpinorField& s) { impl_->step(s); }
ScalarRecord FullPropagator::measure(const SpinorField& s, const SpinorField& initial) {
    return impl_->measure(s, initial);
}
double FullPropagator::energy(const SpinorField& s) { return impl_->measure(s, s).energy; }

// ---------------------------------------------------------------------------
// Semi-adiabatic propagation on the lower surface

struct SemiAdiabaticPropagator::Impl {
    Impl(const ModelParams& p, const GridSpec& g, double dt_) : grid(g), dt(dt_), kinetic(g, dt_) {
        potential.resize(g.size());
        half.resize(g.size());
        for (int ix = 0; ix < g.n(); ++ix) {
            for (int iy = 0; iy < g.n(); ++iy) {
                const std::size_t idx = g.index(ix, iy);
                potential[idx] = lower_surface(p, g.coord(ix), g.coord(iy));
                half[idx] = std::polar(1.0, -0.5 * dt * potential[idx]);
            }
        }
    }

    void step(ScalarField& s) {
        for (std::size_t i = 0; i < half.size(); ++i) s.psi[i] *= half[i];
        kinetic.apply(s.psi);
        for (std::size_t i = 0; i < half.size(); ++i) s.psi[i] *= half[i];
        s.t += dt;
    }

    ScalarRecord measure(const ScalarField& s, const ScalarField& initial) {
        const double w = grid.dx() * grid.dx();
        ScalarRecord r;
        r.t = s.t;
        r.norm = sum_norm(s.psi) * w;
        r.sigma_z = std::numeric_limits<double>::quiet_NaN();
        PositionMoments pos;
        accumulate_position(grid, s.psi, pos);
        double px2 = 0.0;
        double py2 = 0.0;
        kinetic.accumulate_momentum(s.psi, px2, py2);
        r.n_a = 0.5 * (pos.x2 * w + px2 - r.norm);
        r.n_b = 0.5 * (pos.y2 * w + py2 - r.norm);
        double v = 0.0;
        for (std::size_t i = 0; i < potential.size(); ++i) v += potential[i] * std::norm(s.psi[i]);
        r.energy = 0.5 * (px2 + py2) + v * w;
        r.boundary_probability = pos.edge * w;
        r.autocorr = inner_product(initial, s);
        r.autocorr_rotated = sum_overlap_rotated(grid, initial.psi, s.psi) * w;
        return r;
    }

    GridSpec grid;
    double dt;
    Kinetic kinetic;
    std::vector<double> potential;
    std::vector<cplx> half;
};

SemiAdiabaticPropagator::SemiAdiabaticPropagator(const ModelParams& p, const GridSpec& g, double dt)
    : impl_(std::make_unique<Impl>(p, g, dt)) {}
SemiAdiabaticPropagator::~SemiAdiabaticPropagator() = default;
SemiAdiabaticPropagator::SemiAdiabaticPropagator(SemiAdiabaticPropagator&&) noexcept = default;
SemiAdiabaticPropagator& SemiAdiabaticPropagator::operator=(SemiAdiabaticPropagator&&) noexcept = default;

void SemiAdiabaticPropagator::step(ScalarField& s) { impl_->step(s); }
ScalarRecord SemiAdiabaticPropagator::measure(const ScalarField& s, const ScalarField& initial) {
    return impl_->measure(s, initial);
}
double SemiAdiabaticPropagator::energy(const ScalarField& s) { return impl_->measure(s, s).energy; }

SpinorField step_full(SpinorField s, const ModelParams& p, double dt) {
    FullPropagator prop(p, s.grid, dt);
    prop.step(s);
    return s;
}

ScalarField step_semi_adiabatic(ScalarField s, const ModelParams& p, double dt) {
    SemiAdiabaticPropagator prop(p, s.grid, dt);
    prop.step(s);
    return s;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Propagator, typename Field>
Trajectory run(const Field& s0, const ModelParams& p, const PropagationConfig& cfg, PropagationMode mode) {
    cfg.validate();
    if (cfg.mode != mode) throw ConfigError("propagation mode does not match the initial state type");
    const long steps = cfg.steps();

    std::vector<long> snapshot_steps;
    for (double t : cfg.snapshot_times) snapshot_steps.push_back(std::lround(t / cfg.dt));

    Trajectory traj;
    traj.mode = mode;
    traj.params = p;
    traj.dt = cfg.dt;

    Propagator prop(p, s0.grid, cfg.dt);
    Field s = s0;
    for (long k = 0; k <= steps; ++k) {
        if (k > 0) prop.step(s);
        s.t = k * cfg.dt;
        if (k % cfg.record_stride == 0 || k == steps) {
            ScalarRecord r = prop.measure(s, s0);
            traj.records.push_back(r);
            if (std::abs(r.norm - 1.0) > cfg.norm_guard) {
                std::ostringstream msg;
                msg << "norm drifted to " << r.norm << " at t = " << r.t << "; reduce dt or refine the grid";
                throw NumericalGuardError(msg.str());
            }
            if (r.boundary_probability > cfg.boundary_guard) {
                std::ostringstream msg;
                msg << "probability " << r.boundary_probability << " reached the grid boundary at t = " << r.t
                    << "; increase half_width";
                throw NumericalGuardError(msg.str());
            }
        }
        bool snap = cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0;
        for (long ks : snapshot_steps) snap = snap || ks == k;
        if (snap) traj.snapshots.emplace_back(s);
    }
    return traj;
}

} // namespace

Trajectory propagate(const SpinorField& s0, const ModelParams& p, const PropagationConfig& cfg) {
    return run<FullPropagator>(s0, p, cfg, PropagationMode::Full);
}

Trajectory propagate(const ScalarField& s0, const ModelParams& p, const PropagationConfig& cfg) {
    return run<SemiAdiabaticPropagator>(s0, p, cfg, PropagationMode::SemiAdiabatic);
}

} // namespace cavjt
