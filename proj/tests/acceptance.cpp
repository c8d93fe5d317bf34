// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select a
// subset by number, e.g. `cavjt_acceptance 1 2 3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "cavjt/berry.hpp"
#include "cavjt/config.hpp"
#include "cavjt/fock.hpp"
#include "cavjt/observables.hpp"

using namespace cavjt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunConfig preset(const char* name) { return load_config(std::string(CAVJT_PRESET_DIR) + "/" + name + ".json"); }

Outcome berry_sign_change() {
    const ModelParams p(1.0, 0.0, 0.0, kPi / 2);
    double worst = 0.0;
    for (double r : {0.5, 2.0, 10.0}) worst = std::max(worst, std::abs(berry_phase_numeric(p, r) + kPi));
    return {worst < 1e-8, fmt("max |gamma + pi| = %.3e over R in {0.5, 2, 10} (tol 1e-8)", worst)};
}

Outcome phase_map_limits() {
    const RunConfig c = preset("fig2a");
    BerryOptions opt;
    opt.n_samples = c.berry.n_samples;
    const PhaseMap m = phase_map(c.model, c.berry.lambda, c.berry.theta, opt, 1);
    double worst_zero = 0.0;
    for (std::size_t i = 0; i < m.lambda_axis.size(); ++i)
        worst_zero = std::max(worst_zero, std::abs(std::remainder(m.at(i, 0), kTwoPi)));
    const PhaseMap mid = phase_map(c.model, {10.0, 10.0, 1}, {kPi / 2, kPi / 2, 1}, opt, 1);
    const double dev = std::abs(mid.gamma[0] + kPi);
    return {worst_zero < 1e-8 && dev < 0.05,
            fmt("%zux%zu map: max |gamma mod 2pi| at theta=phi = %.3e (tol 1e-8); gamma(lambda=10, theta=pi/2) = %.6f, "
                "|gamma + pi| = %.3e (tol 0.05)",
                m.lambda_axis.size(), m.theta_axis.size(), worst_zero, mid.gamma[0], dev)};
}

Outcome sombrero_radius_check() {
    const double lam = 6.0, om = 0.5;
    const double numeric = surface_geometry(ModelParams(lam, om)).rho_min;
    const double formula = std::sqrt(4 * lam * lam - std::pow(om / (4 * lam), 2));
    const double err = std::abs(numeric - formula);
    return {err < 1e-8, fmt("rho_min = %.12f, formula %.12f, |diff| = %.3e (tol 1e-8)", numeric, formula, err)};
}

Outcome unitarity_energy() {
    const ModelParams p(2.0, 0.5);
    const GridSpec g(256, 12.0);
    PropagationConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 200.0;
    cfg.record_stride = 5;
    cfg.boundary_guard = 1.0;
    const Trajectory t = propagate(initial_state(p, g, 2 * p.lambda(), 0.0), p, cfg);
    const double e0 = t.records.front().energy;
    double norm_drift = 0.0, energy_drift = 0.0, boundary = 0.0;
    for (const auto& r : t.records) {
        norm_drift = std::max(norm_drift, std::abs(r.norm - 1.0));
        energy_drift = std::max(energy_drift, std::abs(r.energy - e0) / std::abs(e0));
        boundary = std::max(boundary, r.boundary_probability);
    }
    return {norm_drift < 1e-9 && energy_drift < 1e-6,
            fmt("norm drift %.3e (tol 1e-9); relative energy drift %.3e (tol 1e-6); max edge probability %.3e",
                norm_drift, energy_drift, boundary)};
}

Outcome oracle_equivalence() {
    const RunConfig c = preset("oracle");
    const auto cases = random_oracle_cases(20, c.oracle.seed, 24);
    double worst = 1.0;
    int passed = 0;
    for (const auto& oc : cases) {
        const OracleResult r = cross_validate(oc, c.oracle.grid);
        worst = std::min(worst, r.fidelity);
        passed += r.fidelity >= 0.999;
    }
    return {passed == 20, fmt("%d/20 instances with fidelity >= 0.999, worst %.8f", passed, worst)};
}

struct Fig3Runs {
    double x0 = 0.0;
    double t_in = 0.0;
    Snapshot full_quarter, full_end, semi_quarter, semi_end;
};

const Fig3Runs& fig3_runs() {
    static const Fig3Runs runs = [] {
        const RunConfig c = preset("fig3");
        const GridSpec g = c.grid.resolve(c.model);
        Fig3Runs r;
        r.x0 = c.initial.resolved_x0(c.model);
        r.t_in = timescales(c.model).t_in;
        PropagationConfig cfg;
        cfg.dt = c.propagation.dt;
        cfg.t_final = std::round(r.t_in / cfg.dt) * cfg.dt;
        cfg.record_stride = 100;
        cfg.snapshot_times = {r.t_in / 4, cfg.t_final};
        const Trajectory full = propagate(initial_state(c.model, g, r.x0, 0.0), c.model, cfg);
        cfg.mode = PropagationMode::SemiAdiabatic;
        const Trajectory semi = propagate(initial_scalar_state(g, r.x0, 0.0), c.model, cfg);
        r.full_quarter = full.snapshots.at(0);
        r.full_end = full.snapshots.at(1);
        r.semi_quarter = semi.snapshots.at(0);
        r.semi_end = semi.snapshots.at(1);
        return r;
    }();
    return runs;
}

struct RingVerdict {
    double centre = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

RingVerdict ring_samples(const Snapshot& s, double radius) {
    const DensityInterpolator f = std::visit([](const auto& v) { return DensityInterpolator(v); }, s);
    const double dx = std::visit([](const auto& v) { return v.grid.dx(); }, s);
    RingVerdict v;
    v.centre = f(-radius, 0.0);
    v.lo = 1e300;
    v.hi = -1e300;
    for (int k : {-4, -3, -2, -1, 1, 2, 3, 4}) {
        const double a = kPi + k * dx / radius;
        const double d = f(radius * std::cos(a), radius * std::sin(a));
        v.lo = std::min(v.lo, d);
        v.hi = std::max(v.hi, d);
    }
    return v;
}

Outcome interference_signature() {
    const Fig3Runs& r = fig3_runs();
    const RingVerdict full = ring_samples(r.full_end, r.x0);
    const RingVerdict semi = ring_samples(r.semi_end, r.x0);
    const bool node = full.centre < full.lo;
    const bool antinode = semi.centre > semi.hi;
    return {node && antinode,
            fmt("full: density %.4e vs ring neighbours [%.4e, %.4e] (%s); semi: %.4e vs [%.4e, %.4e] (%s)",
                full.centre, full.lo, full.hi, node ? "minimum" : "not a minimum", semi.centre, semi.lo, semi.hi,
                antinode ? "maximum" : "not a maximum")};
}

Outcome photon_parity() {
    const Fig3Runs& r = fig3_runs();
    const int n_max = preset("fig3").observables.n_max;
    auto stats = [&](const Snapshot& s) {
        return std::visit([&](const auto& v) { return photon_statistics(reduce_mode(v, FieldMode::B), n_max); }, s);
    };
    const PhotonStats semi = stats(r.semi_quarter);
    const PhotonStats full = stats(r.full_quarter);
    const bool ok = semi.parity_odd_weight() < 1e-8 && full.parity_odd_weight() > 0.0 &&
                    full.parity_odd_weight() < full.parity_even_weight / 5;
    return {ok, fmt("semi odd weight %.3e (tol 1e-8); full odd %.4e, even %.4e (need 0 < odd < even/5)",
                    semi.parity_odd_weight(), full.parity_odd_weight(), full.parity_even_weight)};
}

double interpolate(const std::vector<ScalarRecord>& rec, double t) {
    for (std::size_t k = 1; k < rec.size(); ++k)
        if (rec[k].t >= t) {
            const double w = (t - rec[k - 1].t) / (rec[k].t - rec[k - 1].t);
            return (1 - w) * rec[k - 1].n_a + w * rec[k].n_a;
        }
    return rec.back().n_a;
}

double max_in(const std::vector<ScalarRecord>& rec, double lo, double hi, const std::function<double(const ScalarRecord&)>& f) {
    double m = 0.0;
    for (const auto& r : rec)
        if (r.t >= lo && r.t <= hi) m = std::max(m, f(r));
    return m;
}

std::vector<RevivalPeak> peaks_of(const std::vector<ScalarRecord>& rec, const std::function<double(const ScalarRecord&)>& f) {
    std::vector<double> t, v;
    for (const auto& r : rec) {
        t.push_back(r.t);
        v.push_back(f(r));
    }
    return find_peaks(t, v, 0.5);
}

bool peak_near(const std::vector<RevivalPeak>& peaks, double centre, double half, double* best) {
    bool any = false;
    *best = 0.0;
    for (const auto& pk : peaks)
        if (std::abs(pk.t - centre) <= half) {
            any = true;
            *best = std::max(*best, pk.value);
        }
    return any;
}

Outcome swap_and_revival() {
    const RunConfig c = preset("reduced");
    const GridSpec g = c.grid.resolve(c.model);
    const TimeScales ts = timescales(c.model);
    const double x0 = c.initial.resolved_x0(c.model);
    PropagationConfig cfg;
    cfg.dt = c.propagation.dt;
    cfg.record_stride = 5;
    cfg.t_final = std::ceil((ts.t_rev + ts.t_in) / cfg.dt) * cfg.dt;
    const Trajectory full = propagate(initial_state(c.model, g, x0, 0.0), c.model, cfg);
    cfg.mode = PropagationMode::SemiAdiabatic;
    cfg.t_final = std::ceil((2 * ts.t_rev + ts.t_in) / cfg.dt) * cfg.dt;
    const Trajectory semi = propagate(initial_scalar_state(g, x0, 0.0), c.model, cfg);

    const double tau = 2 * c.model.lambda() * ts.t_in;
    double n_min = 1e300, t_min = 0.0;
    for (const auto& r : full.records)
        if (r.n_a < n_min) {
            n_min = r.n_a;
            t_min = r.t;
        }
    const double n_tau = interpolate(full.records, tau);
    const bool swap = n_tau <= 1.1 * n_min;

    auto plain = [](const ScalarRecord& r) { return std::abs(r.autocorr); };
    auto rotated = [](const ScalarRecord& r) { return std::abs(r.autocorr_rotated); };
    double full_peak = 0.0, semi_rot_peak = 0.0, semi_late_peak = 0.0;
    const bool full_revival = peak_near(peaks_of(full.records, plain), ts.t_rev, ts.t_in, &full_peak);
    const bool semi_mirror = peak_near(peaks_of(semi.records, rotated), ts.t_rev, ts.t_in, &semi_rot_peak);
    const double semi_plain_at_rev = max_in(semi.records, ts.t_rev - ts.t_in, ts.t_rev + ts.t_in, plain);
    const bool semi_late = peak_near(peaks_of(semi.records, plain), 2 * ts.t_rev, ts.t_in, &semi_late_peak);

    const bool ok = swap && full_revival && semi_mirror && semi_plain_at_rev < 0.5 && semi_late;
    return {ok, fmt("n_a(2 lambda T_in = %.2f) = %.4f vs min %.4f at t = %.2f (tol 10%%); full |A| peak %.3f within "
                    "T_in of t_rev = %.2f; semi: rotated-overlap peak %.3f near t_rev, max plain |A| there %.3f (< 0.5), "
                    "plain |A| peak %.3f within T_in of 2 t_rev",
                    tau, n_tau, n_min, t_min, full_peak, ts.t_rev, semi_rot_peak, semi_plain_at_rev, semi_late_peak)};
}

Outcome free_field() {
    const ModelParams p(0.0, 0.0);
    const GridSpec g(64, 8.0);
    const double x0 = 2.0;
    PropagationConfig cfg;
    cfg.dt = kTwoPi / 65536;
    cfg.t_final = 4 * kTwoPi;
    cfg.record_stride = 16;
    const Trajectory t = propagate(initial_state(p, g, x0, 0.0), p, cfg);
    double worst = 0.0;
    for (const auto& r : t.records) worst = std::max(worst, std::abs(r.n_a - x0 * x0 / 2));
    const auto peaks = revival_detector(t);
    bool regular = peaks.size() == 3;
    double timing = 0.0, lowest = 1.0;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        timing = std::max(timing, std::abs(peaks[k].t - (k + 1) * kTwoPi));
        lowest = std::min(lowest, peaks[k].value);
    }
    regular = regular && timing < 1e-3 && lowest > 1 - 1e-6;
    return {worst < 1e-8 && regular,
            fmt("dt = 2pi/65536: max |n_a - x0^2/2| = %.3e (tol 1e-8); %zu revival peaks, max offset from 2 pi k = %.2e, lowest |A| = %.9f",
                worst, peaks.size(), timing, lowest)};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> all{{1, "Berry phase sign change", berry_sign_change},
                                     {2, "phase-map limits", phase_map_limits},
                                     {3, "sombrero radius", sombrero_radius_check},
                                     {4, "unitarity and energy", unitarity_energy},
                                     {5, "grid vs Fock oracle", oracle_equivalence},
                                     {6, "interference signature", interference_signature},
                                     {7, "photon parity", photon_parity},
                                     {8, "mode swap and revival", swap_and_revival},
                                     {9, "free field", free_field}};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !o.pass;
        std::printf("%s criterion %d (%s): %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
