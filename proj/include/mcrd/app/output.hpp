#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcrd/dynamics.hpp"
#include "mcrd/spectra.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd::app {

using nlohmann::json;

std::string sha256_hex(const std::string& data);

/// Writes to a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form, identical on every run.
std::string fmt_double(double x);

/// Collects the files of one run and their SHA-256 digests. write() may be
/// called from several threads.
class ArtifactSet {
public:
    explicit ArtifactSet(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const json& doc);

    const std::filesystem::path& dir() const { return dir_; }
    std::map<std::string, std::string> digests() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return digests_;
    }
    /// Digests of the .csv files only.
    json csv_digests() const;

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> digests_;
    mutable std::mutex mutex_;
};

std::string timeseries_csv(const Trajectory& traj);
/// Columns x, [y,] u, v, z, w.
std::string fields_csv(const Field& u, const Field& v, const ModelParams& p);

json spectrum_json(const SpectrumReport& rep);
json mu_curve_json(const MuCurve& curve);
std::string mu_curve_csv(const MuCurve& curve);

/// Manifest header shared by every mode: derived constants and the grid data.
json manifest_base(const json& resolved_config, const ModelParams& p, const Grid& grid, double lambda);

}  // namespace mcrd::app
