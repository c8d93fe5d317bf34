// io.hpp - CSV tables and the binary snapshot container consumed by the plotting layer.
//
// Numbers are written with 17 significant digits so identical inputs give
// byte-identical files. A snapshot is a JSON metadata file plus one raw array per
// component: little-endian float64, row-major with index ix * n + iy, complex
// components stored as interleaved (re, im).

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavjt/berry.hpp"
#include "cavjt/observables.hpp"

namespace cavjt {

/// "%.17g".
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

std::string to_csv(const CsvTable& t);
/// Throws IoError if the file cannot be written.
void write_csv(const std::filesystem::path& path, const CsvTable& t);
/// Throws ValidationError naming the line and column when the header differs from
/// `expected_columns` (if given) or a cell does not parse.
CsvTable parse_csv(const std::string& text, const std::vector<std::string>& expected_columns = {});
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_columns = {});

namespace schema {
inline const std::vector<std::string> surfaces{"x", "y", "v_minus", "v_plus"};
inline const std::vector<std::string> phase_map{"lambda", "theta", "gamma"};
inline const std::vector<std::string> records{"t", "norm", "energy", "n_a", "n_b", "sigma_z", "autocorr_abs"};
inline const std::vector<std::string> photon_stats{"n", "p_n"};
inline const std::vector<std::string> q_function{"re_alpha", "im_alpha", "q"};
} // namespace schema

/// Square lattice of `points` per axis over [-extent, extent].
CsvTable surfaces_table(const ModelParams& p, double extent, int points);
CsvTable phase_map_table(const PhaseMap& m);
CsvTable records_table(const Trajectory& traj);
CsvTable photon_table(const PhotonStats& s);
CsvTable q_table(const QFunction& q);

struct SnapshotMeta {
    ModelParams params;
    GridSpec grid;
    double t = 0.0;
    /// "full", "semi" or "density".
    std::string kind;
};

/// Writes <dir>/<stem>.json plus <stem>_psi_e.bin / <stem>_psi_g.bin (spinor),
/// <stem>_psi.bin (scalar) or <stem>_density.bin (real density).
void write_snapshot(const std::filesystem::path& dir, const std::string& stem, const Snapshot& s,
                    const ModelParams& p);
void write_density(const std::filesystem::path& dir, const std::string& stem, const std::vector<double>& density,
                   const GridSpec& g, double t, const ModelParams& p);

SnapshotMeta read_snapshot_meta(const std::filesystem::path& json_path);
/// Reads a spinor or scalar snapshot back. Throws ValidationError on inconsistent files.
Snapshot read_snapshot(const std::filesystem::path& json_path);
std::vector<double> read_density(const std::filesystem::path& json_path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace cavjt
