#pragma once

#include <string>
#include <vector>

#include "mcrd/app/config.hpp"
#include "mcrd/app/output.hpp"

namespace mcrd::app {

struct SweepPoint {
    int index = 0;
    double D = 0.0;
    double tau = 0.0;
    double z_bar = 0.0;   ///< NaN when the point is driven by lambda
    double lambda = 0.0;
    std::string status;   ///< done | skipped | failed
    std::string reason;
    double xi = 0.0;
    double alpha = 0.0;
    std::vector<double> roots;
    int morse_L = -1;
    int morse_A = -1;
    int zero_L = -1;
    int zero_A = -1;
    bool hypothesis = false;
    bool patterned = false;
    double z_spread = 0.0;
    std::string stop_reason;
};

/// Worker count from RDCLI_WORKERS (default 1, invalid values rejected).
int worker_count();

/// Evaluates every point of the D x tau x (z_bar or lambda) product on a worker pool.
/// Results come back in grid order regardless of scheduling.
std::vector<SweepPoint> run_sweep(const RunConfig& cfg, ArtifactSet* point_artifacts);

std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace mcrd::app
