#include "cavjt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cavjt/errors.hpp"

namespace cavjt {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(key + " must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key + " must be finite");
        return d;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key, 0.0);
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) fail(key + " must be an integer");
        return v.get<int>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned()) fail(key + " must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(key + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) fail(key + " must be a string");
        return v.get<std::string>();
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

TimeSpec parse_time(const json& j, const std::string& path) {
    if (j.is_number()) {
        const double v = j.get<double>();
        if (!std::isfinite(v) || v < 0.0) throw ConfigError(path + ": time must be finite and >= 0");
        return {v, TimeUnit::Absolute};
    }
    Section s(j, path);
    TimeSpec t;
    if (!s.has("value")) s.fail("missing 'value'");
    t.value = s.number("value", 0.0);
    if (t.value < 0.0) s.fail("value must be >= 0");
    const std::string unit = s.string("unit", "abs");
    if (unit == "abs") t.unit = TimeUnit::Absolute;
    else if (unit == "t_in") t.unit = TimeUnit::TIn;
    else if (unit == "t_frac") t.unit = TimeUnit::TFrac;
    else if (unit == "t_rev") t.unit = TimeUnit::TRev;
    else s.fail("unit must be one of abs, t_in, t_frac, t_rev");
    s.finish();
    return t;
}

json time_to_json(const TimeSpec& t) {
    switch (t.unit) {
    case TimeUnit::Absolute: return t.value;
    case TimeUnit::TIn: return {{"value", t.value}, {"unit", "t_in"}};
    case TimeUnit::TFrac: return {{"value", t.value}, {"unit", "t_frac"}};
    case TimeUnit::TRev: return {{"value", t.value}, {"unit", "t_rev"}};
    }
    return t.value;
}

std::vector<TimeSpec> parse_times(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of times");
    std::vector<TimeSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_time(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

json times_to_json(const std::vector<TimeSpec>& ts) {
    json a = json::array();
    for (const auto& t : ts) a.push_back(time_to_json(t));
    return a;
}

AxisRange parse_axis(const json& j, const std::string& path, AxisRange fallback) {
    Section s(j, path);
    AxisRange a;
    a.lo = s.number("lo", fallback.lo);
    a.hi = s.number("hi", fallback.hi);
    a.count = s.integer("count", fallback.count);
    if (a.count < 1) s.fail("count must be >= 1");
    if (a.hi < a.lo) s.fail("hi must be >= lo");
    s.finish();
    return a;
}

json axis_to_json(const AxisRange& a) { return {{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; }

ModelParams parse_model(const json& j) {
    Section s(j, "model");
    const double lambda = s.number("lambda", 3.0);
    const double omega = s.number("omega_q", 0.5);
    const double phi = s.number("phi", 0.0);
    const double theta = s.number("theta", kPi / 2);
    s.finish();
    try {
        return ModelParams(lambda, omega, phi, theta);
    } catch (const ConfigError& e) {
        s.fail(e.what());
    }
}

} // namespace

double TimeSpec::resolve(const ModelParams& p) const {
    if (unit == TimeUnit::Absolute) return value;
    TimeScales ts;
    try {
        ts = timescales(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("time unit needs lambda >= 1/(2 pi): ") + e.what());
    }
    switch (unit) {
    case TimeUnit::TIn: return value * ts.t_in;
    case TimeUnit::TFrac: return value * ts.t_frac;
    case TimeUnit::TRev: return value * ts.t_rev;
    case TimeUnit::Absolute: break;
    }
    return value;
}

GridSpec GridConfig::resolve(const ModelParams& p) const {
    const double l = half_width.value_or(surface_geometry(p).rho_min + 8.0);
    return GridSpec(n, l);
}

ModeSelection parse_mode_selection(const std::string& text) {
    if (text == "both") return ModeSelection::Both;
    return parse_mode(text) == PropagationMode::Full ? ModeSelection::Full : ModeSelection::Semi;
}

std::string to_string(ModeSelection m) {
    switch (m) {
    case ModeSelection::Full: return "full";
    case ModeSelection::Semi: return "semi";
    case ModeSelection::Both: return "both";
    }
    return "both";
}

RunConfig parse_config(const json& j) {
    Section root(j, "");
    RunConfig c;
    if (root.has("model")) c.model = parse_model(root.raw("model"));

    if (root.has("grid")) {
        Section s(root.raw("grid"), "grid");
        c.grid.n = s.integer("n", c.grid.n);
        c.grid.half_width = s.optional_number("half_width");
        s.finish();
    }
    if (root.has("initial")) {
        Section s(root.raw("initial"), "initial");
        c.initial.x0 = s.optional_number("x0");
        c.initial.y0 = s.number("y0", 0.0);
        s.finish();
    }
    if (root.has("propagation")) {
        Section s(root.raw("propagation"), "propagation");
        auto& pr = c.propagation;
        pr.dt = s.number("dt", pr.dt);
        if (s.has("t_final")) pr.t_final = parse_time(s.raw("t_final"), "propagation.t_final");
        pr.snapshot_stride = s.integer("snapshot_stride", pr.snapshot_stride);
        pr.record_stride = s.integer("record_stride", pr.record_stride);
        pr.boundary_guard = s.number("boundary_guard", pr.boundary_guard);
        try {
            pr.modes = parse_mode_selection(s.string("mode", to_string(pr.modes)));
        } catch (const ConfigError& e) {
            s.fail(e.what());
        }
        if (!(pr.dt > 0.0)) s.fail("dt must be > 0");
        if (pr.snapshot_stride < 0) s.fail("snapshot_stride must be >= 0");
        if (pr.record_stride < 1) s.fail("record_stride must be >= 1");
        if (!(pr.boundary_guard > 0.0)) s.fail("boundary_guard must be > 0");
        s.finish();
    }
    if (root.has("observables")) {
        Section s(root.raw("observables"), "observables");
        auto& ob = c.observables;
        ob.photon_stats_stride = s.integer("photon_stats_stride", ob.photon_stats_stride);
        ob.n_max = s.integer("n_max", ob.n_max);
        ob.q_points = s.integer("q_points", ob.q_points);
        ob.q_coarse = s.boolean("q_coarse", ob.q_coarse);
        if (s.has("q_times")) ob.q_times = parse_times(s.raw("q_times"), "observables.q_times");
        if (s.has("density_times"))
            ob.density_times = parse_times(s.raw("density_times"), "observables.density_times");
        if (ob.photon_stats_stride < 0) s.fail("photon_stats_stride must be >= 0");
        if (ob.n_max < 1) s.fail("n_max must be >= 1");
        if (ob.q_points < 2) s.fail("q_points must be >= 2");
        s.finish();
    }
    if (root.has("surfaces")) {
        Section s(root.raw("surfaces"), "surfaces");
        auto& su = c.surfaces;
        su.extent = s.number("extent", su.extent);
        su.points = s.integer("points", su.points);
        if (s.has("omegas")) {
            const json& a = s.raw("omegas");
            if (!a.is_array()) s.fail("omegas must be an array");
            for (const auto& v : a) {
                if (!v.is_number() || v.get<double>() < 0.0) s.fail("omegas must be numbers >= 0");
                su.omegas.push_back(v.get<double>());
            }
        }
        if (!(su.extent > 0.0)) s.fail("extent must be > 0");
        if (su.points < 2) s.fail("points must be >= 2");
        s.finish();
    }
    if (root.has("berry")) {
        Section s(root.raw("berry"), "berry");
        auto& b = c.berry;
        if (s.has("lambda")) b.lambda = parse_axis(s.raw("lambda"), "berry.lambda", b.lambda);
        if (s.has("theta")) b.theta = parse_axis(s.raw("theta"), "berry.theta", b.theta);
        b.n_samples = s.integer("n_samples", b.n_samples);
        if (b.lambda.lo <= 0.0) s.fail("lambda range must stay above 0");
        if (b.n_samples < 64) s.fail("n_samples must be >= 64");
        s.finish();
    }
    if (root.has("oracle")) {
        Section s(root.raw("oracle"), "oracle");
        auto& o = c.oracle;
        o.instances = s.integer("instances", o.instances);
        o.seed = s.unsigned_integer("seed", o.seed);
        o.n_cut = s.integer("n_cut", o.n_cut);
        o.grid.grid_n = s.integer("grid_n", o.grid.grid_n);
        o.grid.half_width = s.number("half_width", o.grid.half_width);
        o.grid.dt = s.number("dt", o.grid.dt);
        o.grid.min_fidelity = s.number("min_fidelity", o.grid.min_fidelity);
        if (o.instances < 1) s.fail("instances must be >= 1");
        if (o.n_cut < 2) s.fail("n_cut must be >= 2");
        if (!(o.grid.dt > 0.0)) s.fail("dt must be > 0");
        s.finish();
    }
    c.output = root.string("output", c.output);
    root.finish();
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

json to_json(const ModelParams& p) {
    return {{"lambda", p.lambda()}, {"omega_q", p.omega_q()}, {"phi", p.phi()}, {"theta", p.theta()}};
}

json to_json(const GridSpec& g) { return {{"n", g.n()}, {"half_width", g.half_width()}}; }

json to_json(const RunConfig& c) {
    json j;
    j["model"] = to_json(c.model);
    j["grid"] = {{"n", c.grid.n}, {"half_width", c.grid.half_width ? json(*c.grid.half_width) : json(nullptr)}};
    j["initial"] = {{"x0", c.initial.x0 ? json(*c.initial.x0) : json(nullptr)}, {"y0", c.initial.y0}};
    const auto& pr = c.propagation;
    j["propagation"] = {{"dt", pr.dt},
                        {"t_final", time_to_json(pr.t_final)},
                        {"snapshot_stride", pr.snapshot_stride},
                        {"record_stride", pr.record_stride},
                        {"boundary_guard", pr.boundary_guard},
                        {"mode", to_string(pr.modes)}};
    const auto& ob = c.observables;
    j["observables"] = {{"photon_stats_stride", ob.photon_stats_stride},
                        {"n_max", ob.n_max},
                        {"q_points", ob.q_points},
                        {"q_coarse", ob.q_coarse},
                        {"q_times", times_to_json(ob.q_times)},
                        {"density_times", times_to_json(ob.density_times)}};
    j["surfaces"] = {{"extent", c.surfaces.extent}, {"points", c.surfaces.points}, {"omegas", c.surfaces.omegas}};
    j["berry"] = {{"lambda", axis_to_json(c.berry.lambda)},
                  {"theta", axis_to_json(c.berry.theta)},
                  {"n_samples", c.berry.n_samples}};
    const auto& o = c.oracle;
    j["oracle"] = {{"instances", o.instances},   {"seed", o.seed},
                   {"n_cut", o.n_cut},           {"grid_n", o.grid.grid_n},
                   {"half_width", o.grid.half_width}, {"dt", o.grid.dt},
                   {"min_fidelity", o.grid.min_fidelity}};
    j["output"] = c.output;
    return j;
}

} // namespace cavjt
