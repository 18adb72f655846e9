#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrd/dynamics.hpp"
#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd::app {

using nlohmann::json;

inline const std::vector<std::string> kModes = {"simulate", "stationary", "spectrum", "sweep", "limit-tau1", "verify"};

/// Either an explicit list or min/max/count (inclusive linspace).
struct Axis {
    std::vector<double> values;
};

struct StationarySettings {
    std::string guess = "dynamics";  ///< dynamics | cosine | homogeneous
    double amplitude = 0.1;          ///< cosine guess amplitude
    double relax_t_end = 5000.0;     ///< dynamics guess: integration horizon
    double settle_tol = 1e-10;
    NewtonOptions newton;
};

struct SpectrumSettings {
    std::string state = "stationary";  ///< stationary | homogeneous
    double s_min = 0.2;
    double s_max = 10.0;
    int s_count = 50;
    int j_max = 6;
};

struct SweepSettings {
    Axis D;
    Axis tau;
    Axis z_bar;
    Axis lambda;  ///< alternative to z_bar
    double relax_t_end = 2000.0;
    double pattern_tol = 1e-6;  ///< max - min of z above which a point counts as patterned
    bool point_artifacts = false;
};

struct LimitSettings {
    double lambda_hat = 2.0;
    double amplitude = 0.1;
    double relax_dt = 0.1;
    double relax_tol = 1e-9;
    int relax_steps = 200000;
};

struct VerifySettings {
    int n = 256;
};

/// Fully resolved run configuration. Every key of the input document maps to
/// one field here; unknown keys are rejected while parsing.
struct RunConfig {
    std::string mode;
    double D = 0.25;
    double tau = 2.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    int dim = 1;
    std::array<int, 2> n{256, 256};
    std::array<double, 2> length{1.0, 1.0};
    StepperConfig stepper;
    std::optional<double> lambda;
    std::optional<double> z_bar;
    StationarySettings stationary;
    SpectrumSettings spectrum;
    SweepSettings sweep;
    LimitSettings limit;
    VerifySettings verify;
    std::string output_dir = "out";

    ModelParams params() const;
    GridPtr make_grid() const;
    /// lambda as given, or |Omega| (xi z_bar - g(z_bar)/k) from z_bar.
    double resolve_lambda(const ModelParams& p, const Grid& grid) const;
};

/// Validates and resolves a configuration document. Throws ConfigError naming
/// the offending key on unknown keys, wrong types or out-of-range values.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& file);

/// The resolved configuration, including defaults, as written to manifests.
json to_json(const RunConfig& cfg);

}  // namespace mcrd::app
