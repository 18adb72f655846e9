#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcrd/app/output.hpp"
#include "mcrd/dynamics.hpp"
#include "mcrd/spectra.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd::app {

/// Preset constants. Both use tau = 2, alpha1 = alpha2 = 1 and the
/// homogeneous level z_bar = 2 on the unit interval.
struct Preset {
    std::string name;
    double D;
    double tau;
    double alpha1;
    double alpha2;
    double z_bar;

    ModelParams params() const { return derive_params(D, tau, alpha1, alpha2); }
};

Preset reference_preset();  ///< D = 0.25: the homogeneous state is stable
Preset turing_preset();     ///< D = 0.002: mode 2 of the homogeneous state is unstable

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;    ///< measured values, deterministic
    double seconds = 0.0;  ///< wall time including any shared setup it triggered
};

struct SuiteOptions {
    int n = 256;
    std::uint64_t seed = 1;
};

/// The numbered property checks. Expensive shared ingredients (the long
/// Turing run, the patterned stationary state, spectra) are computed on first
/// use and reused by later criteria.
class AcceptanceSuite {
public:
    static constexpr int kCount = 13;

    explicit AcceptanceSuite(SuiteOptions options = {});
    ~AcceptanceSuite();

    CriterionResult run(int id);
    std::vector<CriterionResult> run_all();

    /// CSV/JSON artifacts of the shared runs (time series, fields, spectra).
    void write_artifacts(ArtifactSet& out);

    struct Cache;

private:
    std::unique_ptr<Cache> cache_;
    SuiteOptions options_;
};

/// One line per result: "[PASS] 3 title: detail".
std::string format_result(const CriterionResult& r);
std::string results_csv(const std::vector<CriterionResult>& results);

}  // namespace mcrd::app
