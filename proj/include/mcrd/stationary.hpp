#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

/// Converged solution of -D Lap z = g(z) + (k/|Omega|)(lambda - xi int z).
struct StationaryState {
    Field z_star;
    double w_bar = 0.0;
    double lambda = 0.0;
    double residual_norm = 0.0;
    double j_value = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;  ///< ||F|| before each Newton update, then the final value
    std::optional<int> morse_index;        ///< filled in by spectral analysis
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    bool damped = true;  ///< halving line search on ||F||
    /// Dense LU up to this many nodes; sparse LU + Sherman-Morrison beyond.
    int dense_limit = 1024;
};

/// Roots of g(z) + k(lambda/|Omega| - xi z) = 0 in [0, z_max], ascending.
/// Default z_max = max(1, lambda / (|Omega| (xi + D))), an upper bound for
/// every root. Each root is refined by
/// bisection to 1e-12 or better.
std::vector<double> homogeneous_roots(const ModelParams& p, double lambda, double volume = 1.0,
                                      std::optional<double> z_max = std::nullopt);

/// lambda such that the constant z_bar is a homogeneous root.
double lambda_for_homogeneous(const ModelParams& p, double z_bar, double volume = 1.0);

/// F(z) = D Lap_h z + g(z) + (k/|Omega|)(lambda - xi int z).
Field stationary_residual(const Field& z, const ModelParams& p, double lambda);

/// Newton iteration on F(z) = 0. Converged when the weighted L2 norm of F
/// drops below options.tol. Throws SolverError on a singular Jacobian
/// (message carries the smallest singular value) or when max_iter is hit.
StationaryState newton_solve(const Field& z_init, const ModelParams& p, double lambda,
                             const NewtonOptions& options = {});

/// Explicit-reaction, implicit-diffusion relaxation of the nonlocal
/// gradient flow z_t = -delta J_lambda(z) until ||z_t|| < tol or max_steps.
Field relax_gradient_flow(const Field& z_init, const ModelParams& p, double lambda, double dt, double tol,
                          int max_steps);

/// Pointwise (u*, v*) from z* and the constant w_bar. Rejects D == 1.
std::pair<Field, Field> reconstruct_uv(const StationaryState& s, const ModelParams& p);

/// Initial guess z_bar + amplitude cos(pi x / L) (first axis).
Field cosine_guess(const GridPtr& grid, double z_bar, double amplitude);

/// Solution of the tau -> 1 limit problem
///   -D Lap z = g(z) + mu,   int z = lambda_hat,
/// with mu the Lagrange multiplier of the mean constraint.
struct LimitSolution {
    Field z;
    double mu = 0.0;
    double lambda_hat = 0.0;
    double residual_norm = 0.0;
    double constraint_error = 0.0;    ///< |int z - lambda_hat|
    double multiplier_error = 0.0;    ///< |mu + (1/|Omega|) int g(z)|
    double j_hat = 0.0;               ///< int D/2 |grad z|^2 - G(z)
    int iterations = 0;
};

/// Newton on the augmented (z, mu) system. The initial guess is shifted to
/// satisfy the constraint if it does not already.
LimitSolution limit_tau1_solve(const Field& z_init, const Kinetics& kin, double lambda_hat,
                               const NewtonOptions& options = {});

/// Mass-preserving relaxation z_t = D Lap z + g(z) - <g(z)> used to seed the
/// limit solver with a patterned guess.
Field relax_limit_flow(const Field& z_init, const Kinetics& kin, double dt, double tol, int max_steps);

}  // namespace mcrd
