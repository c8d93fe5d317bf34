#include "cavjt/io.hpp"

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cavjt/config.hpp"
#include "cavjt/errors.hpp"

namespace cavjt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const CsvTable& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

namespace {

void write_bytes(const fs::path& path, const char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

void write_csv(const fs::path& path, const CsvTable& t) {
    const std::string text = to_csv(t);
    write_bytes(path, text.data(), text.size());
}

CsvTable parse_csv(const std::string& text, const std::vector<std::string>& expected_columns) {
    std::istringstream in(text);
    std::string line;
    CsvTable t;
    if (!std::getline(in, line)) throw ValidationError("csv: empty input, no header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.columns = split(line);
    if (!expected_columns.empty() && t.columns != expected_columns) {
        std::ostringstream msg;
        msg << "csv: header mismatch";
        for (std::size_t c = 0; c < std::max(t.columns.size(), expected_columns.size()); ++c) {
            const std::string got = c < t.columns.size() ? t.columns[c] : "<missing>";
            const std::string want = c < expected_columns.size() ? expected_columns[c] : "<none>";
            if (got != want) {
                msg << " at column " << c + 1 << ": expected '" << want << "', found '" << got << "'";
                break;
            }
        }
        throw ValidationError(msg.str());
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns.size()) {
            std::ostringstream msg;
            msg << "csv: line " << line_no << " has " << cells.size() << " cells, expected " << t.columns.size();
            throw ValidationError(msg.str());
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const char* begin = cells[c].c_str();
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(begin, &end);
            if (cells[c].empty() || end != begin + cells[c].size()) {
                std::ostringstream msg;
                msg << "csv: line " << line_no << ", column '" << t.columns[c] << "': cannot parse '" << cells[c]
                    << "'";
                throw ValidationError(msg.str());
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expected_columns) {
    try {
        return parse_csv(read_text(path), expected_columns);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

CsvTable surfaces_table(const ModelParams& p, double extent, int points) {
    if (points < 2 || !(extent > 0.0)) throw ConfigError("surfaces: need extent > 0 and at least 2 points");
    CsvTable t{schema::surfaces, {}};
    t.rows.reserve(static_cast<std::size_t>(points) * points);
    for (int i = 0; i < points; ++i) {
        const double x = -extent + 2.0 * extent * i / (points - 1);
        for (int j = 0; j < points; ++j) {
            const double y = -extent + 2.0 * extent * j / (points - 1);
            const auto s = adiabatic_surfaces(p, std::hypot(x, y), std::atan2(y, x));
            t.rows.push_back({x, y, s.v_minus, s.v_plus});
        }
    }
    return t;
}

CsvTable phase_map_table(const PhaseMap& m) {
    CsvTable t{schema::phase_map, {}};
    for (std::size_t i = 0; i < m.lambda_axis.size(); ++i)
        for (std::size_t j = 0; j < m.theta_axis.size(); ++j)
            t.rows.push_back({m.lambda_axis[i], m.theta_axis[j], m.at(i, j)});
    return t;
}

CsvTable records_table(const Trajectory& traj) {
    CsvTable t{schema::records, {}};
    for (const auto& r : traj.records)
        t.rows.push_back({r.t, r.norm, r.energy, r.n_a, r.n_b, r.sigma_z, std::abs(r.autocorr)});
    return t;
}

CsvTable photon_table(const PhotonStats& s) {
    CsvTable t{schema::photon_stats, {}};
    for (std::size_t n = 0; n < s.p_n.size(); ++n) t.rows.push_back({static_cast<double>(n), s.p_n[n]});
    return t;
}

CsvTable q_table(const QFunction& q) {
    CsvTable t{schema::q_function, {}};
    for (std::size_t k = 0; k < q.q.size(); ++k) t.rows.push_back({q.alpha[k].real(), q.alpha[k].imag(), q.q[k]});
    return t;
}

void write_json(const fs::path& path, const json& j) {
    const std::string text = j.dump(2) + "\n";
    write_bytes(path, text.data(), text.size());
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void to_little_endian(std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (double& d : v) {
            auto u = std::bit_cast<std::uint64_t>(d);
            u = __builtin_bswap64(u);
            d = std::bit_cast<double>(u);
        }
    }
}

void write_doubles(const fs::path& path, std::vector<double> v) {
    to_little_endian(v);
    write_bytes(path, reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

std::vector<double> read_doubles(const fs::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> v(expected);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(expected * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(expected * sizeof(double)) || in.peek() != EOF)
        throw ValidationError(path.string() + ": expected " + std::to_string(expected) + " float64 values");
    to_little_endian(v);
    return v;
}

std::vector<double> interleave(const Field2D& f) {
    std::vector<double> v(2 * f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        v[2 * i] = f[i].real();
        v[2 * i + 1] = f[i].imag();
    }
    return v;
}

Field2D deinterleave(const std::vector<double>& v) {
    Field2D f(v.size() / 2);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = {v[2 * i], v[2 * i + 1]};
    return f;
}

json meta_document(const std::string& kind, const ModelParams& p, const GridSpec& g, double t, const json& components) {
    return {{"kind", kind},
            {"params", to_json(p)},
            {"grid", to_json(g)},
            {"time", t},
            {"dtype", "float64"},
            {"byte_order", "little"},
            {"layout", "row-major, index ix * n + iy"},
            {"components", components}};
}

json component(const std::string& name, const std::string& file, bool complex_values) {
    return {{"name", name}, {"file", file}, {"values", complex_values ? "complex_interleaved" : "real"}};
}

} // namespace

void write_snapshot(const fs::path& dir, const std::string& stem, const Snapshot& s, const ModelParams& p) {
    if (const auto* sp = std::get_if<SpinorField>(&s)) {
        const std::string fe = stem + "_psi_e.bin";
        const std::string fg = stem + "_psi_g.bin";
        write_doubles(dir / fe, interleave(sp->psi_e));
        write_doubles(dir / fg, interleave(sp->psi_g));
        write_json(dir / (stem + ".json"),
                   meta_document("full", p, sp->grid, sp->t,
                                 json::array({component("psi_e", fe, true), component("psi_g", fg, true)})));
    } else {
        const auto& sc = std::get<ScalarField>(s);
        const std::string f = stem + "_psi.bin";
        write_doubles(dir / f, interleave(sc.psi));
        write_json(dir / (stem + ".json"),
                   meta_document("semi", p, sc.grid, sc.t, json::array({component("psi", f, true)})));
    }
}

void write_density(const fs::path& dir, const std::string& stem, const std::vector<double>& density, const GridSpec& g,
                   double t, const ModelParams& p) {
    if (density.size() != g.size()) throw std::invalid_argument("write_density: size mismatch");
    const std::string f = stem + "_density.bin";
    write_doubles(dir / f, density);
    write_json(dir / (stem + ".json"), meta_document("density", p, g, t, json::array({component("density", f, false)})));
}

namespace {

json read_meta_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

} // namespace

SnapshotMeta read_snapshot_meta(const fs::path& json_path) {
    const json j = read_meta_json(json_path);
    try {
        SnapshotMeta m;
        const auto& p = j.at("params");
        m.params = ModelParams(p.at("lambda").get<double>(), p.at("omega_q").get<double>(), p.at("phi").get<double>(),
                               p.at("theta").get<double>());
        m.grid = GridSpec(j.at("grid").at("n").get<int>(), j.at("grid").at("half_width").get<double>());
        m.t = j.at("time").get<double>();
        m.kind = j.at("kind").get<std::string>();
        if (j.at("dtype") != "float64" || j.at("byte_order") != "little")
            throw ValidationError(json_path.string() + ": unsupported dtype or byte order");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(json_path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ValidationError(json_path.string() + ": " + e.what());
    }
}

namespace {

fs::path component_path(const fs::path& json_path, const json& j, std::size_t k, const std::string& name) {
    const auto& comps = j.at("components");
    if (comps.size() <= k || comps[k].at("name") != name)
        throw ValidationError(json_path.string() + ": missing component " + name);
    return json_path.parent_path() / comps[k].at("file").get<std::string>();
}

} // namespace

Snapshot read_snapshot(const fs::path& json_path) {
    const SnapshotMeta m = read_snapshot_meta(json_path);
    const json j = read_meta_json(json_path);
    const std::size_t count = 2 * m.grid.size();
    if (m.kind == "full") {
        SpinorField s{m.grid, deinterleave(read_doubles(component_path(json_path, j, 0, "psi_e"), count)),
                      deinterleave(read_doubles(component_path(json_path, j, 1, "psi_g"), count)), m.t};
        return s;
    }
    if (m.kind == "semi") {
        ScalarField s{m.grid, deinterleave(read_doubles(component_path(json_path, j, 0, "psi"), count)), m.t};
        return s;
    }
    throw ValidationError(json_path.string() + ": kind '" + m.kind + "' is not a wave-function snapshot");
}

std::vector<double> read_density(const fs::path& json_path) {
    const SnapshotMeta m = read_snapshot_meta(json_path);
    if (m.kind != "density") throw ValidationError(json_path.string() + ": not a density snapshot");
    const json j = read_meta_json(json_path);
    return read_doubles(component_path(json_path, j, 0, "density"), m.grid.size());
}

} // namespace cavjt
