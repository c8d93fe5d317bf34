// config.hpp - run configuration read from a JSON document.
//
// Every section is optional and falls back to the defaults below; unknown keys
// anywhere in the document are rejected. Times accept either a plain number or
// {"value": v, "unit": "t_in" | "t_frac" | "t_rev"}.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavjt/berry.hpp"
#include "cavjt/fock.hpp"
#include "cavjt/observables.hpp"

namespace cavjt {

enum class TimeUnit { Absolute, TIn, TFrac, TRev };

struct TimeSpec {
    double value = 0.0;
    TimeUnit unit = TimeUnit::Absolute;

    double resolve(const ModelParams& p) const;
    friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct GridConfig {
    int n = 512;
    /// Unset means rho_min + 8.
    std::optional<double> half_width;

    GridSpec resolve(const ModelParams& p) const;
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct InitialConfig {
    /// Unset means x0 = 2 lambda.
    std::optional<double> x0;
    double y0 = 0.0;

    double resolved_x0(const ModelParams& p) const { return x0.value_or(2.0 * p.lambda()); }
    friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

enum class ModeSelection { Full, Semi, Both };

struct PropagationSettings {
    double dt = 0.01;
    TimeSpec t_final{1.0, TimeUnit::TIn};
    int snapshot_stride = 0;
    int record_stride = 1;
    ModeSelection modes = ModeSelection::Both;
    /// Edge-probability abort threshold; 1 disables it.
    double boundary_guard = 1e-8;

    friend bool operator==(const PropagationSettings&, const PropagationSettings&) = default;
};

struct ObservableRequests {
    /// Photon statistics every this many steps (0 disables); they are always
    /// produced at the Q-function and density times as well.
    int photon_stats_stride = 0;
    int n_max = 64;
    int q_points = 81;
    bool q_coarse = false;
    std::vector<TimeSpec> q_times;
    std::vector<TimeSpec> density_times;

    friend bool operator==(const ObservableRequests&, const ObservableRequests&) = default;
};

struct SurfaceRequest {
    double extent = 4.0;
    int points = 101;
    /// Detunings to export; empty means the model's own.
    std::vector<double> omegas;

    friend bool operator==(const SurfaceRequest&, const SurfaceRequest&) = default;
};

struct BerryRequest {
    AxisRange lambda{0.1, 10.0, 50};
    AxisRange theta{0.0, kPi, 50};
    int n_samples = 256;

    friend bool operator==(const BerryRequest&, const BerryRequest&) = default;
};

struct OracleRequest {
    int instances = 20;
    std::uint64_t seed = 20240611;
    int n_cut = 24;
    OracleSettings grid;

    friend bool operator==(const OracleRequest&, const OracleRequest&) = default;
};

struct RunConfig {
    ModelParams model{3.0, 0.5};
    GridConfig grid;
    InitialConfig initial;
    PropagationSettings propagation;
    ObservableRequests observables;
    SurfaceRequest surfaces;
    BerryRequest berry;
    OracleRequest oracle;
    std::string output = "out";

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError on malformed input, unknown keys or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const GridSpec& g);

ModeSelection parse_mode_selection(const std::string& text);
std::string to_string(ModeSelection m);

} // namespace cavjt
