#include "mcrd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd {

namespace {

double shift_for(Scheme scheme) { return scheme == Scheme::ImexEuler ? 1.0 : 0.5; }

Field reaction_field(const Field& u, const Field& v, const Kinetics& p) {
    Eigen::VectorXd r(u.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = reaction(u[i], v[i], p);
    return Field(u.grid_ptr(), std::move(r));
}

}  // namespace

ImexStepper::ImexStepper(GridPtr grid, const ModelParams& p, double dt, Scheme scheme)
    : grid_(grid),
      p_(p),
      dt_(dt),
      scheme_(scheme),
      solve_u_(grid, 1.0, shift_for(scheme) * dt * p.D),
      solve_v_(grid, p.tau, shift_for(scheme) * dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
}

State ImexStepper::step(const State& s) const {
    const Field r = reaction_field(s.u, s.v, p_);
    Field rhs_u = s.u + dt_ * r;
    Field rhs_v = p_.tau * s.v - dt_ * r;
    if (scheme_ == Scheme::ImexCrankNicolson) {
        rhs_u += (0.5 * dt_ * p_.D) * grid_->laplacian(s.u);
        rhs_v += (0.5 * dt_) * grid_->laplacian(s.v);
    }
    State next{s.t + dt_, solve_u_.solve_conservative(rhs_u), solve_v_.solve_conservative(rhs_v)};
    if (!next.u.values().allFinite() || !next.v.values().allFinite()) {
        std::ostringstream msg;
        msg << "non-finite value after step to t = " << next.t << " (dt = " << dt_ << ")";
        throw SolverError(msg.str());
    }
    return next;
}

State step(const State& s, const ModelParams& p, const StepperConfig& config) {
    return ImexStepper(s.u.grid_ptr(), p, config.dt, config.scheme).step(s);
}

double total_mass(const State& s, const ModelParams& p) {
    const Grid& grid = s.u.grid();
    return grid.integral(s.u) + p.tau * grid.integral(s.v);
}

double dt_budget(const State& s, const ModelParams& p) {
    // df/du = h'(z), df/dv = h'(z) + k; scan the occupied z range densely.
    const Field z = s.u + s.v;
    const double lo = z.min();
    const double hi = z.max();
    double worst = 0.0;
    constexpr int kSamples = 256;
    for (int i = 0; i <= kSamples; ++i) {
        const double zz = lo + (hi - lo) * i / kSamples;
        const double hp = h_prime(zz, p);
        worst = std::max({worst, std::abs(hp), std::abs(hp + p.k)});
    }
    return worst > 0.0 ? 0.5 / worst : std::numeric_limits<double>::infinity();
}

Trajectory run(const State& initial, const ModelParams& p, const StepperConfig& config) {
    if (!(config.t_end > 0.0)) throw ConfigError("run: t_end must be positive");
    if (config.output_every < 1) throw ConfigError("run: output_every must be at least 1");
    const Grid& grid = initial.u.grid();
    const ImexStepper stepper(initial.u.grid_ptr(), p, config.dt, config.scheme);

    Trajectory traj;
    traj.dt = config.dt;
    traj.dt_budget = dt_budget(initial, p);
    traj.dt_warning = config.dt > traj.dt_budget;
    {
        const auto [z0, w0] = to_zw(initial.u, initial.v, p);
        traj.lambda = mass_lambda(z0, w0, p);
    }

    auto make_snapshot = [&](const State& s, double z_t_norm, double lyap) {
        const auto [z, w] = to_zw(s.u, s.v, p);
        Snapshot snap;
        snap.t = s.t;
        snap.mass = total_mass(s, p);
        snap.min_u = s.u.min();
        snap.min_v = s.v.min();
        snap.lyapunov = lyap;
        snap.j_lambda = j_functional(z, p, traj.lambda).total;
        snap.grad_w_inf = grid.grad_sup(w);
        snap.z_t_norm = z_t_norm;
        if (config.keep_states) snap.state = s;
        return snap;
    };
    auto lyapunov_of = [&](const State& s) {
        const auto [z, w] = to_zw(s.u, s.v, p);
        return lyapunov(z, w, p).total;
    };

    const long steps = std::max(1L, std::lround(config.t_end / config.dt));
    State cur = initial;
    double lyap = lyapunov_of(cur);
    traj.min_u = cur.u.min();
    traj.min_v = cur.v.min();
    traj.max_lyapunov = lyap;
    traj.snapshots.push_back(make_snapshot(cur, 0.0, lyap));
    traj.stop_reason = "t_end";

    double z_t_norm = 0.0;
    bool last_recorded = true;
    for (long n = 1; n <= steps; ++n) {
        State next;
        try {
            next = stepper.step(cur);
        } catch (const SolverError& e) {
            traj.stop_reason = std::string("diverged: ") + e.what();
            break;
        }
        next.t = initial.t + n * config.dt;
        const double lyap_next = lyapunov_of(next);
        traj.max_lyapunov_increase = std::max(traj.max_lyapunov_increase, lyap_next - lyap);
        traj.max_lyapunov = std::max(traj.max_lyapunov, lyap_next);
        z_t_norm = grid.norm((next.u + next.v) - (cur.u + cur.v)) / config.dt;
        traj.min_u = std::min(traj.min_u, next.u.min());
        traj.min_v = std::min(traj.min_v, next.v.min());
        cur = std::move(next);
        lyap = lyap_next;

        const bool settled = config.settle_tol > 0.0 && z_t_norm < config.settle_tol;
        last_recorded = n % config.output_every == 0 || n == steps || settled;
        if (last_recorded) traj.snapshots.push_back(make_snapshot(cur, z_t_norm, lyap));
        if (settled) {
            traj.stop_reason = "settled";
            break;
        }
    }
    if (!last_recorded) traj.snapshots.push_back(make_snapshot(cur, z_t_norm, lyap));
    traj.positivity_violated = traj.min_u < -kPositivityTolerance || traj.min_v < -kPositivityTolerance;
    traj.final_state = std::move(cur);
    return traj;
}

DissipationReport dissipation_check(const Trajectory& traj, const ModelParams& p) {
    std::vector<const Snapshot*> stored;
    for (const auto& s : traj.snapshots)
        if (s.state) stored.push_back(&s);
    if (stored.size() < 2) throw ConfigError("dissipation_check needs at least two stored states");

    DissipationReport r;
    for (std::size_t i = 0; i + 1 < stored.size(); ++i) {
        const State& a = *stored[i]->state;
        const State& b = *stored[i + 1]->state;
        const double dt = b.t - a.t;
        const Grid& grid = a.u.grid();
        const auto [z0, w0] = to_zw(a.u, a.v, p);
        const auto [z1, w1] = to_zw(b.u, b.v, p);
        const Field z_t = (1.0 / dt) * (z1 - z0);
        const Field w_t = (1.0 / dt) * (w1 - w0);
        const Field w_mid = 0.5 * (w0 + w1);
        const Field lap_w = grid.laplacian(w_mid);
        const double diss = p.xi * grid.inner(z_t, z_t) + grid.inner(w_t, w_t) +
                            p.alpha * p.D * grid.inner(lap_w, lap_w) + p.alpha * p.k * grid.grad_norm_sq(w_mid);
        const double l0 = lyapunov(z0, w0, p).total;
        const double l1 = lyapunov(z1, w1, p).total;
        r.max_mismatch = std::max(r.max_mismatch, std::abs(-(l1 - l0) / dt - diss));
        r.max_dissipation = std::max(r.max_dissipation, diss);
        r.max_increase = std::max(r.max_increase, l1 - l0);
    }
    r.relative_mismatch = r.max_dissipation > 0.0 ? r.max_mismatch / r.max_dissipation : r.max_mismatch;
    r.nonincreasing = r.max_increase < 1e-8 * traj.dt;
    return r;
}

Field gradient_flow_step(const Field& z, const ModelParams& p, double lambda, double dt) {
    if (!(dt > 0.0)) throw ConfigError("gradient_flow_step: dt must be positive");
    const Grid& grid = z.grid();
    const ShiftedLaplacianSolver solver(z.grid_ptr(), 1.0, dt * p.D);
    const double nonlocal = p.k / grid.volume() * (lambda - p.xi * grid.integral(z));
    Field rhs = z + dt * g_field(z, p);
    rhs.values().array() += dt * nonlocal;
    return solver.solve_conservative(rhs);
}

State perturbed_equilibrium(const GridPtr& grid, const ModelParams& p, double lambda, double perturbation,
                            std::uint64_t seed) {
    const auto roots = homogeneous_roots(p, lambda, grid->volume());
    if (roots.empty()) throw SolverError("no homogeneous equilibrium for the requested lambda");
    const double z_bar = roots.front();
    const double wb = lambda / grid->volume() - p.xi * z_bar;
    const double u_bar = (wb - z_bar) / (p.D - 1.0);
    const double v_bar = z_bar - u_bar;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd u(grid->nodes());
    Eigen::VectorXd v(grid->nodes());
    for (int i = 0; i < grid->nodes(); ++i) {
        u[i] = u_bar * (1.0 + perturbation * unit(rng));
        v[i] = v_bar * (1.0 + perturbation * unit(rng));
    }
    State s{0.0, Field(grid, std::move(u)), Field(grid, std::move(v))};
    // Remove the mass the noise added so that lambda is exactly the requested one.
    const double excess = total_mass(s, p) - grid->volume() * (u_bar + p.tau * v_bar);
    s.v.values().array() -= excess / (p.tau * grid->volume());
    return s;
}

}  // namespace mcrd
