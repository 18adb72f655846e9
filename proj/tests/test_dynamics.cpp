#include "doctest.h"
#include "mcrd/dynamics.hpp"
#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/stationary.hpp"
#include "support.hpp"

using namespace mcrd;

namespace {

// Homogeneous equilibrium at level z_bar: h(z) + k v = 0.
State equilibrium(const GridPtr& grid, const ModelParams& p, double z_bar) {
    const double v = -h(z_bar, p) / p.k;
    return {0.0, Field::constant(grid, z_bar - v), Field::constant(grid, v)};
}

}  // namespace

TEST_CASE("homogeneous equilibrium is a fixed point of the step") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(256);
    const State s0 = equilibrium(grid, p, 2.0);
    CHECK(std::abs(reaction(s0.u[0], s0.v[0], p)) < 1e-15);
    for (Scheme scheme : {Scheme::ImexEuler, Scheme::ImexCrankNicolson}) {
        StepperConfig cfg;
        cfg.dt = 0.1;
        cfg.scheme = scheme;
        const State s1 = step(s0, p, cfg);
        CHECK(testing::max_abs(s1.u - s0.u) < 1e-12);
        CHECK(testing::max_abs(s1.v - s0.v) < 1e-12);
        CHECK(s1.t == doctest::Approx(0.1));
    }
}

TEST_CASE("each step conserves the total mass") {
    const ModelParams p = testing::turing_params();
    for (const GridPtr& grid : {Grid::make_1d(256), Grid::make_2d(24, 16, 1.0, 0.5)}) {
        for (Scheme scheme : {Scheme::ImexEuler, Scheme::ImexCrankNicolson}) {
            State s{0.0, testing::random_field(grid, 1, 0.0, 3.0), testing::random_field(grid, 2, 0.0, 3.0)};
            StepperConfig cfg;
            cfg.dt = 0.05;
            cfg.scheme = scheme;
            const ImexStepper stepper(grid, p, cfg.dt, cfg.scheme);
            const double m0 = total_mass(s, p);
            for (int i = 0; i < 20; ++i) {
                const State next = stepper.step(s);
                CHECK(std::abs(total_mass(next, p) - total_mass(s, p)) < 1e-12 * m0);
                s = next;
            }
        }
    }
}

TEST_CASE("zero state stays zero") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    State s{0.0, Field::constant(grid, 0.0), Field::constant(grid, 0.0)};
    StepperConfig cfg;
    for (int i = 0; i < 10; ++i) s = step(s, p, cfg);
    CHECK(testing::max_abs(s.u) == 0.0);
    CHECK(testing::max_abs(s.v) == 0.0);
}

TEST_CASE("non-finite states are reported") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(16);
    Field u = Field::constant(grid, 1.0);
    u[3] = std::nan("");
    CHECK_THROWS_AS(step(State{0.0, u, Field::constant(grid, 1.0)}, p, StepperConfig{}), SolverError);
}

TEST_CASE("Lyapunov functional is constant at equilibrium") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(128);
    StepperConfig cfg;
    cfg.t_end = 50.0;
    const Trajectory traj = run(equilibrium(grid, p, 2.0), p, cfg);
    for (const auto& s : traj.snapshots) CHECK(std::abs(s.lyapunov - traj.snapshots.front().lyapunov) < 1e-10);
    CHECK(traj.stop_reason == "t_end");
}

TEST_CASE("Turing run settles on a pattern and conserves mass") {
    const ModelParams p = testing::turing_params();
    const GridPtr grid = Grid::make_1d(256);
    const double lambda = lambda_for_homogeneous(p, 2.0);
    StepperConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1e4;
    cfg.output_every = 100;
    cfg.perturbation = 0.01;
    const State init = perturbed_equilibrium(grid, p, lambda, cfg.perturbation, 1);
    CHECK(mass_lambda(init.u + init.v, p.D * init.u + init.v, p) == doctest::Approx(lambda).epsilon(1e-14));
    const Trajectory traj = run(init, p, cfg);
    CHECK(traj.final_state.t == doctest::Approx(1e4));
    const double m0 = traj.snapshots.front().mass;
    double drift = 0.0;
    for (const auto& s : traj.snapshots) drift = std::max(drift, std::abs(s.mass - m0) / m0);
    CHECK(drift < 1e-10);
    CHECK(traj.snapshots.back().grad_w_inf < 1e-6);
    const Field z = traj.final_state.u + traj.final_state.v;
    CHECK(z.max() - z.min() > 1e-3);
    CHECK_FALSE(traj.positivity_violated);
    CHECK_FALSE(traj.dt_warning);
    CHECK(traj.max_lyapunov_increase < 1e-8 * cfg.dt);
}

TEST_CASE("discrete dissipation mismatch is first order in dt") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(128);
    const double z_bar = 2.0;
    const double v_bar = -h(z_bar, p) / p.k;
    const Field bump = Field::sample(grid, [](double x, double) { return 0.2 * std::cos(M_PI * x); });
    const State init{0.0, Field::constant(grid, z_bar - v_bar) + bump, Field::constant(grid, v_bar) + bump};
    std::vector<double> mismatch;
    for (double dt : {0.004, 0.002}) {
        StepperConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 0.5;
        cfg.output_every = 1;
        cfg.keep_states = true;
        const Trajectory traj = run(init, p, cfg);
        const DissipationReport rep = dissipation_check(traj, p);
        CHECK(rep.nonincreasing);
        CHECK(rep.max_increase < 1e-8 * dt);
        mismatch.push_back(rep.max_mismatch);
    }
    const double ratio = mismatch[0] / mismatch[1];
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
}

TEST_CASE("dissipation check needs stored states") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(32);
    StepperConfig cfg;
    cfg.t_end = 1.0;
    const Trajectory traj = run(perturbed_equilibrium(grid, p, lambda_for_homogeneous(p, 2.0), 0.01, 1), p, cfg);
    CHECK_THROWS_AS(dissipation_check(traj, p), ConfigError);
}

TEST_CASE("gradient flow decreases J and tracks the nonlocal term") {
    const ModelParams p = testing::turing_params();
    const GridPtr grid = Grid::make_1d(128);
    const double lambda = lambda_for_homogeneous(p, 2.0);
    Field z = Field::constant(grid, 2.0) + testing::random_field(grid, 4, -0.05, 0.05);
    const double dt = 0.05;
    double j_prev = j_functional(z, p, lambda).total;
    for (int i = 0; i < 200; ++i) {
        const double int_z = grid->integral(z);
        const double predicted = int_z + dt * (grid->integral(g_field(z, p)) + p.k * (lambda - p.xi * int_z));
        z = gradient_flow_step(z, p, lambda, dt);
        CHECK(std::abs(grid->integral(z) - predicted) < 1e-13);
        const double j = j_functional(z, p, lambda).total;
        CHECK(j <= j_prev + 1e-8 * dt);
        j_prev = j;
    }
}

TEST_CASE("explicit reaction budget") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(16);
    const State s = equilibrium(grid, p, 2.0);
    // At a single level the budget is 0.5 / max(|h'|, |h' + k|).
    const double hp = h_prime(2.0, p);
    CHECK(dt_budget(s, p) == doctest::Approx(0.5 / std::max(std::abs(hp), std::abs(hp + p.k))));
    StepperConfig cfg;
    cfg.dt = 2.0 * dt_budget(s, p);
    cfg.t_end = cfg.dt;
    CHECK(run(s, p, cfg).dt_warning);
}

TEST_CASE("settling stops the run early") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    StepperConfig cfg;
    cfg.t_end = 1e4;
    cfg.settle_tol = 1e-9;
    const Trajectory traj = run(perturbed_equilibrium(grid, p, lambda_for_homogeneous(p, 2.0), 0.05, 3), p, cfg);
    CHECK(traj.stop_reason == "settled");
    CHECK(traj.final_state.t < 1e4);
}
