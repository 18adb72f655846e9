#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

/// A functional value together with its named additive contributions.
struct EnergyBreakdown {
    double total = 0.0;
    std::vector<std::pair<std::string, double>> parts;

    double part(const std::string& name) const;
};

/// L(z, w) = int (alpha+D)/2 |grad w|^2 + k/2 w^2 + xi D/2 |grad z|^2 - xi G(z).
EnergyBreakdown lyapunov(const Field& z, const Field& w, const ModelParams& p);

/// J_lambda(z) = int D/2 |grad z|^2 - G(z) - (k lambda/|Omega|) z
///              + (k xi / 2|Omega|) (int z)^2.
EnergyBreakdown j_functional(const Field& z, const ModelParams& p, double lambda);

/// Weighted-L2 first variation of the discrete J_lambda:
///   -(D Lap_h z + g(z) + (k/|Omega|)(lambda - xi int z)).
Field j_gradient(const Field& z, const ModelParams& p, double lambda);

/// Conserved quantity int (xi z + w).
double mass_lambda(const Field& z, const Field& w, const ModelParams& p);

/// Spatial average of w at fixed lambda: (lambda - xi int z) / |Omega|.
double w_bar(const Field& z, const ModelParams& p, double lambda);

struct SemiUnfoldingReport {
    double lyapunov = 0.0;            ///< L(z, w)
    double lyapunov_averaged = 0.0;   ///< L(z, w_bar)
    double reduced = 0.0;             ///< xi J_lambda(z) + lambda^2 k / (2|Omega|)
    double gap = 0.0;                 ///< L(z, w) - L(z, w_bar)
    double predicted_gap = 0.0;       ///< k/2 ||w - w_bar||^2 + (alpha+D)/2 ||grad w||^2
    double identity_error = 0.0;      ///< |L(z, w_bar) - reduced|
    bool inequality_holds = false;    ///< gap >= -tolerance
};

/// Checks L(z,w) >= L(z,w_bar) = xi J_lambda(z) + lambda^2 k/(2|Omega|).
/// Throws ConfigError when int(xi z + w) differs from lambda by more than
/// `mass_tolerance`.
SemiUnfoldingReport semi_unfolding_check(const Field& z, const Field& w, const ModelParams& p, double lambda,
                                         double mass_tolerance = 1e-10);

}  // namespace mcrd
