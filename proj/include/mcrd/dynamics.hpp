#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

/// Nodal tolerance for the nonnegativity monitor.
inline constexpr double kPositivityTolerance = 1e-8;

enum class Scheme { ImexEuler, ImexCrankNicolson };

struct State {
    double t = 0.0;
    Field u;
    Field v;
};

struct StepperConfig {
    double dt = 0.1;
    Scheme scheme = Scheme::ImexEuler;
    double t_end = 100.0;
    int output_every = 10;
    std::uint64_t seed = 1;
    double perturbation = 0.01;  ///< relative amplitude of the uniform initial noise
    /// Stop early once ||z_t||_2 drops below this (0 disables).
    double settle_tol = 0.0;
    /// Keep (u, v) in every snapshot (needed by dissipation_check).
    bool keep_states = false;
};

/// Advances (u, v) with implicit diffusion and explicit reaction. One
/// reaction evaluation r = h(u+v) + k v feeds both equations, so the weighted
/// sum of u + tau v is preserved to roundoff.
class ImexStepper {
public:
    ImexStepper(GridPtr grid, const ModelParams& p, double dt, Scheme scheme);

    /// Throws SolverError if the new state contains NaN or Inf.
    State step(const State& s) const;
    double dt() const { return dt_; }

private:
    GridPtr grid_;
    ModelParams p_;
    double dt_;
    Scheme scheme_;
    ShiftedLaplacianSolver solve_u_;
    ShiftedLaplacianSolver solve_v_;
};

/// One step from scratch (builds the factorization each call).
State step(const State& s, const ModelParams& p, const StepperConfig& config);

/// Weighted total of u + tau v.
double total_mass(const State& s, const ModelParams& p);

/// Explicit-reaction budget 0.5 / max(|df/du|, |df/dv|) over the nodal
/// range of u + v in `s`.
double dt_budget(const State& s, const ModelParams& p);

struct Snapshot {
    double t = 0.0;
    double mass = 0.0;         ///< int (u + tau v)
    double min_u = 0.0;
    double min_v = 0.0;
    double lyapunov = 0.0;     ///< L(z, w)
    double j_lambda = 0.0;     ///< J_lambda(z), lambda = int (xi z + w) of the initial state
    double grad_w_inf = 0.0;   ///< max one-sided difference quotient of w
    double z_t_norm = 0.0;     ///< ||z(t) - z(t - dt)||_2 / dt (0 at the first snapshot)
    std::optional<State> state;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    double lambda = 0.0;
    double dt = 0.0;
    double dt_budget = 0.0;
    bool dt_warning = false;           ///< dt exceeded the probe budget at t = 0
    bool positivity_violated = false;  ///< min(u, v) < -kPositivityTolerance somewhere
    double min_u = 0.0;                ///< over every step, not only snapshots
    double min_v = 0.0;
    double max_lyapunov_increase = 0.0;  ///< max over steps of L(n+1) - L(n)
    double max_lyapunov = 0.0;           ///< max of L over every step
    std::string stop_reason;             ///< "t_end", "settled" or "diverged: ..."
    State final_state;
};

/// Integrates to t_end (or until settled / diverged), recording a snapshot
/// every output_every steps plus the initial and final states.
Trajectory run(const State& initial, const ModelParams& p, const StepperConfig& config);

struct DissipationReport {
    double max_mismatch = 0.0;       ///< max_n |-(L_{n+1} - L_n)/dt - dissipation_n|
    double max_dissipation = 0.0;
    double relative_mismatch = 0.0;  ///< max_mismatch / max_dissipation
    double max_increase = 0.0;       ///< max_n (L_{n+1} - L_n)
    bool nonincreasing = false;      ///< max_increase < 1e-8 dt
};

/// Compares the discrete energy decay with
///   xi ||z_t||^2 + ||w_t||^2 + alpha D ||Lap w||^2 + alpha k ||grad w||^2
/// on consecutive stored snapshots (spatial terms at the step midpoint).
/// Throws ConfigError on fewer than two stored states.
DissipationReport dissipation_check(const Trajectory& traj, const ModelParams& p);

/// One IMEX step of z_t = D Lap z + g(z) + (k/|Omega|)(lambda - xi int z).
Field gradient_flow_step(const Field& z, const ModelParams& p, double lambda, double dt);

/// Homogeneous equilibrium with the given lambda plus seeded uniform noise of
/// relative amplitude `perturbation` on u and v, shifted in v so that the
/// total mass (and lambda) is unchanged. Uses the smallest homogeneous root;
/// throws SolverError if there is none.
State perturbed_equilibrium(const GridPtr& grid, const ModelParams& p, double lambda, double perturbation,
                            std::uint64_t seed);

}  // namespace mcrd
