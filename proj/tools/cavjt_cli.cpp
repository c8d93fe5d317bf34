// cavjt - command-line driver: surfaces, phase maps, propagation runs, time scales
// and the Fock-basis cross-check.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cavjt/config.hpp"
#include "cavjt/errors.hpp"
#include "cavjt/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cavjt;

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::string out;
    std::string mode;
    int threads = 1;
};

fs::path preset_dir() {
    if (const char* env = std::getenv("CAVJT_PRESET_DIR")) return env;
    return CAVJT_PRESET_DIR;
}

RunConfig resolve_config(const Options& o) {
    RunConfig c;
    if (!o.config.empty()) c = load_config(o.config);
    else if (!o.preset.empty()) {
        const fs::path path = preset_dir() / (o.preset + ".json");
        if (!fs::exists(path)) throw ConfigError("unknown preset '" + o.preset + "' (looked for " + path.string() + ")");
        c = load_config(path);
    }
    if (!o.out.empty()) c.output = o.out;
    if (!o.mode.empty()) c.propagation.modes = parse_mode_selection(o.mode);
    return c;
}

fs::path prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

json geometry_json(const SurfaceGeometry& g) {
    return {{"rho_min", g.rho_min},
            {"varphi_min", g.varphi_min},
            {"v_min", g.v_min},
            {"gap_at_ci", g.gap_at_ci},
            {"critical_lambda", g.critical_lambda}};
}

int cmd_surfaces(const RunConfig& c) {
    const fs::path dir = prepare_dir(c.output);
    std::vector<double> omegas = c.surfaces.omegas;
    if (omegas.empty()) omegas.push_back(c.model.omega_q());
    json files = json::array();
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        const ModelParams p = c.model.with_omega(omegas[k]);
        const std::string name = "surfaces_" + std::to_string(k) + ".csv";
        write_csv(dir / name, surfaces_table(p, c.surfaces.extent, c.surfaces.points));
        files.push_back({{"file", name}, {"params", to_json(p)}, {"geometry", geometry_json(surface_geometry(p))}});
        std::cerr << "wrote " << (dir / name).string() << "\n";
    }
    write_json(dir / "surfaces.json", {{"files", files}});
    return 0;
}

int cmd_berry(const RunConfig& c, int threads) {
    const fs::path dir = prepare_dir(c.output);
    BerryOptions opt;
    opt.n_samples = c.berry.n_samples;
    const PhaseMap m = phase_map(c.model, c.berry.lambda, c.berry.theta, opt, threads);
    write_csv(dir / "phase_map.csv", phase_map_table(m));
    write_json(dir / "phase_map.json", {{"params", to_json(c.model)},
                                        {"lambda", {{"lo", c.berry.lambda.lo}, {"hi", c.berry.lambda.hi}, {"count", c.berry.lambda.count}}},
                                        {"theta", {{"lo", c.berry.theta.lo}, {"hi", c.berry.theta.hi}, {"count", c.berry.theta.count}}},
                                        {"file", "phase_map.csv"}});
    std::cerr << "wrote " << (dir / "phase_map.csv").string() << "\n";
    return 0;
}

json timescales_json(const ModelParams& p) {
    json j = {{"params", to_json(p)}, {"geometry", geometry_json(surface_geometry(p))}};
    try {
        const TimeScales ts = timescales(p);
        j["t_in"] = ts.t_in;
        j["t_frac"] = ts.t_frac;
        j["t_rev"] = ts.t_rev;
    } catch (const std::invalid_argument&) {
        j["t_in"] = nullptr;
        j["t_frac"] = nullptr;
        j["t_rev"] = nullptr;
    }
    return j;
}

int cmd_timescales(const RunConfig& c) {
    const json j = timescales_json(c.model);
    std::cout << j.dump(2) << "\n";
    return 0;
}

long to_step(double t, double dt) { return std::lround(t / dt); }

struct RunPlan {
    GridSpec grid;
    double x0 = 0.0;
    double y0 = 0.0;
    double t_final = 0.0;
    std::vector<long> density_steps;
    std::vector<long> q_steps;
};

RunPlan plan_run(const RunConfig& c) {
    RunPlan plan;
    plan.grid = c.grid.resolve(c.model);
    plan.grid.check_containment(c.model);
    plan.x0 = c.initial.resolved_x0(c.model);
    plan.y0 = c.initial.y0;
    const double dt = c.propagation.dt;
    const long steps = to_step(c.propagation.t_final.resolve(c.model), dt);
    if (steps < 1) throw ConfigError("propagation.t_final must cover at least one step");
    plan.t_final = steps * dt;
    auto resolve_steps = [&](const std::vector<TimeSpec>& ts, const char* what) {
        std::vector<long> out;
        for (const auto& t : ts) {
            const long k = to_step(t.resolve(c.model), dt);
            if (k > steps) throw ConfigError(std::string(what) + " time beyond propagation.t_final");
            out.push_back(k);
        }
        return out;
    };
    plan.density_steps = resolve_steps(c.observables.density_times, "observables.density_times");
    plan.q_steps = resolve_steps(c.observables.q_times, "observables.q_times");
    return plan;
}

bool contains(const std::vector<long>& v, long k) { return std::find(v.begin(), v.end(), k) != v.end(); }

template <typename Field>
void write_field_outputs(const fs::path& dir, const RunConfig& c, const RunPlan& plan, const Field& s, json& files) {
    const double dt = c.propagation.dt;
    const long step = to_step(s.t, dt);
    const std::string tag = std::to_string(step);
    const int snap = c.propagation.snapshot_stride;
    const int photon = c.observables.photon_stats_stride;
    const bool want_density = contains(plan.density_steps, step);
    const bool want_q = contains(plan.q_steps, step);
    const bool want_photon = want_density || want_q || (photon > 0 && step % photon == 0);

    if (snap > 0 && step % snap == 0) {
        write_snapshot(dir, "psi_" + tag, Snapshot(s), c.model);
        files.push_back({{"kind", "snapshot"}, {"t", s.t}, {"file", "psi_" + tag + ".json"}});
    }
    if (want_density) {
        write_density(dir, "density_" + tag, density_snapshot(s), s.grid, s.t, c.model);
        files.push_back({{"kind", "density"}, {"t", s.t}, {"file", "density_" + tag + ".json"}});
    }
    if (!want_photon) return;
    for (FieldMode m : {FieldMode::A, FieldMode::B}) {
        const std::string label = m == FieldMode::A ? "a" : "b";
        const ReducedMode r = reduce_mode(s, m);
        const PhotonStats ps = photon_statistics(r, c.observables.n_max);
        const std::string pname = "photon_" + label + "_" + tag + ".csv";
        write_csv(dir / pname, photon_table(ps));
        files.push_back({{"kind", "photon_stats"},
                         {"mode", label},
                         {"t", s.t},
                         {"file", pname},
                         {"mean_n", ps.mean_n},
                         {"parity_even_weight", ps.parity_even_weight},
                         {"truncation_loss", ps.truncation_loss},
                         {"purity", r.purity()}});
        if (want_q) {
            const QFunction q =
                husimi_q(r, AlphaGrid::covering(ps.mean_n, c.observables.q_points), c.observables.q_coarse);
            const std::string qname = "q_" + label + "_" + tag + ".csv";
            write_csv(dir / qname, q_table(q));
            files.push_back({{"kind", "q_function"}, {"mode", label}, {"t", s.t}, {"file", qname}, {"integral", q.integral}});
        }
    }
}

int cmd_propagate(const RunConfig& c) {
    const RunPlan plan = plan_run(c);
    const fs::path root = prepare_dir(c.output);
    std::vector<PropagationMode> modes;
    if (c.propagation.modes != ModeSelection::Semi) modes.push_back(PropagationMode::Full);
    if (c.propagation.modes != ModeSelection::Full) modes.push_back(PropagationMode::SemiAdiabatic);

    for (PropagationMode mode : modes) {
        const fs::path dir = prepare_dir(root / to_string(mode));
        PropagationConfig pc;
        pc.dt = c.propagation.dt;
        pc.t_final = plan.t_final;
        pc.record_stride = c.propagation.record_stride;
        pc.boundary_guard = c.propagation.boundary_guard;
        pc.snapshot_stride = std::gcd(c.propagation.snapshot_stride, c.observables.photon_stats_stride);
        pc.mode = mode;
        for (long k : plan.density_steps) pc.snapshot_times.push_back(k * pc.dt);
        for (long k : plan.q_steps) pc.snapshot_times.push_back(k * pc.dt);

        std::cerr << "propagating " << to_string(mode) << " to t = " << plan.t_final << " on " << plan.grid.n() << "^2 grid\n";
        const Trajectory traj = mode == PropagationMode::Full
                                    ? propagate(initial_state(c.model, plan.grid, plan.x0, plan.y0), c.model, pc)
                                    : propagate(initial_scalar_state(plan.grid, plan.x0, plan.y0), c.model, pc);
        write_csv(dir / "records.csv", records_table(traj));
        json files = json::array({{{"kind", "records"}, {"file", "records.csv"}}});
        for (const Snapshot& s : traj.snapshots)
            std::visit([&](const auto& f) { write_field_outputs(dir, c, plan, f, files); }, s);

        json peaks = json::array();
        for (const auto& pk : revival_detector(traj)) peaks.push_back({{"t", pk.t}, {"value", pk.value}});
        json manifest = timescales_json(c.model);
        manifest["mode"] = to_string(mode);
        manifest["grid"] = to_json(plan.grid);
        manifest["initial"] = {{"x0", plan.x0}, {"y0", plan.y0}};
        manifest["dt"] = pc.dt;
        manifest["t_final"] = plan.t_final;
        manifest["revival_peaks"] = peaks;
        manifest["files"] = files;
        write_json(dir / "manifest.json", manifest);
        std::cerr << "wrote " << dir.string() << "\n";
    }
    return 0;
}

int cmd_oracle_check(const RunConfig& c) {
    const fs::path dir = prepare_dir(c.output);
    const auto cases = random_oracle_cases(c.oracle.instances, c.oracle.seed, c.oracle.n_cut);
    json instances = json::array();
    bool all = true;
    double worst = 1.0;
    for (const auto& oc : cases) {
        const OracleResult r = cross_validate(oc, c.oracle.grid);
        all = all && r.passed;
        worst = std::min(worst, r.fidelity);
        instances.push_back({{"params", to_json(oc.params)},
                             {"x0", oc.x0},
                             {"y0", oc.y0},
                             {"t", oc.t},
                             {"n_cut", oc.n_cut},
                             {"fidelity", r.fidelity},
                             {"leakage", r.leakage},
                             {"fock", {{"n_a", r.fock.n_a}, {"n_b", r.fock.n_b}, {"sigma_z", r.fock.sigma_z}}},
                             {"grid", {{"n_a", r.grid.n_a}, {"n_b", r.grid.n_b}, {"sigma_z", r.grid.sigma_z}}},
                             {"passed", r.passed}});
    }
    const json report = {{"min_fidelity_required", c.oracle.grid.min_fidelity},
                         {"worst_fidelity", worst},
                         {"passed", all},
                         {"instances", instances}};
    write_json(dir / "oracle_report.json", report);
    std::cout << (all ? "PASS" : "FAIL") << " oracle-check: " << cases.size() << " instances, worst fidelity "
              << format_double(worst) << "\n";
    if (!all) throw ValidationError("grid and Fock evolution disagree (fidelity below threshold)");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity Jahn-Teller wave-packet simulator"};
    app.require_subcommand(1);
    Options o;
    auto* config_opt = app.add_option("--config", o.config, "JSON run configuration");
    auto* preset_opt = app.add_option("--preset", o.preset, "Shipped preset (fig1, fig2a, fig2b, fig3, fig5, ...)");
    config_opt->excludes(preset_opt);
    app.add_option("--out", o.out, "Output directory (overrides the config)");
    app.add_option("--mode", o.mode, "full | semi | both (propagate only)");
    app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* surfaces = app.add_subcommand("surfaces", "Export V-/V+ on a Cartesian lattice");
    auto* berry = app.add_subcommand("berry", "Berry phase map over (lambda, theta)");
    auto* prop = app.add_subcommand("propagate", "Wave-packet run with observables");
    auto* oracle = app.add_subcommand("oracle-check", "Grid vs Fock-basis cross-validation");
    auto* times = app.add_subcommand("timescales", "Print T_in, T_frac, T_rev and the surface geometry");
    for (auto* s : {surfaces, berry, prop, oracle, times}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig c = resolve_config(o);
        set_fft_threads(o.threads);
        if (*surfaces) return cmd_surfaces(c);
        if (*berry) return cmd_berry(c, o.threads);
        if (*prop) return cmd_propagate(c);
        if (*oracle) return cmd_oracle_check(c);
        if (*times) return cmd_timescales(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalGuardError& e) {
        std::cerr << "numerical guard: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
