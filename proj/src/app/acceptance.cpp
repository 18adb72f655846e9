#include "mcrd/app/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "mcrd/app/oracles.hpp"
#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"

namespace mcrd::app {

Preset reference_preset() { return {"reference", 0.25, 2.0, 1.0, 1.0, 2.0}; }
Preset turing_preset() { return {"turing", 0.002, 2.0, 1.0, 1.0, 2.0}; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x) {
    std::ostringstream o;
    o.precision(3);
    o << std::scientific << x;
    return o.str();
}

struct NamedRun {
    std::string name;
    ModelParams p;
    Trajectory traj;
};

constexpr double kLongDt = 0.1;
constexpr long kLongSteps = 100000;

}  // namespace

struct AcceptanceSuite::Cache {
    GridPtr grid;
    Preset ref_preset = reference_preset();
    Preset tur_preset = turing_preset();
    ModelParams ref;
    ModelParams tur;

    std::optional<NamedRun> long_run;
    double long_run_seconds = 0.0;
    std::optional<NamedRun> reference_run;
    std::optional<std::pair<NamedRun, NamedRun>> dissipation_runs;
    std::optional<StationaryState> pattern;
    double pattern_seconds = 0.0;

    struct SuiteState {
        std::string name;
        ModelParams p;
        Field z;
        std::optional<SpectrumReport> report;
    };
    std::vector<SuiteState> states;
};

AcceptanceSuite::AcceptanceSuite(SuiteOptions options) : cache_(std::make_unique<Cache>()), options_(options) {
    cache_->grid = Grid::make_1d(options_.n);
    cache_->ref = cache_->ref_preset.params();
    cache_->tur = cache_->tur_preset.params();
}

AcceptanceSuite::~AcceptanceSuite() = default;

namespace {

// Smooth, nonnegative, far-from-equilibrium start used for the dt-refinement study.
State smooth_start(const GridPtr& grid, const ModelParams& p, double z_bar) {
    const State eq = perturbed_equilibrium(grid, p, lambda_for_homogeneous(p, z_bar, grid->volume()), 0.0, 1);
    const double ub = eq.u[0];
    const double vb = eq.v[0];
    const double pi = std::acos(-1.0);
    const double len = grid->length(0);
    return {0.0, Field::sample(grid, [&](double x, double) { return ub * (1.0 + 0.3 * std::cos(pi * x / len)); }),
            Field::sample(grid, [&](double x, double) { return vb * (1.0 + 0.3 * std::cos(2.0 * pi * x / len)); })};
}

const NamedRun& ensure_long_run(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    if (!c.long_run) {
        const auto t0 = Clock::now();
        StepperConfig cfg;
        cfg.dt = kLongDt;
        cfg.t_end = kLongDt * kLongSteps;
        cfg.output_every = 100;
        cfg.keep_states = true;
        cfg.seed = seed;
        const double lambda = lambda_for_homogeneous(c.tur, c.tur_preset.z_bar, c.grid->volume());
        const State init = perturbed_equilibrium(c.grid, c.tur, lambda, 0.01, seed);
        c.long_run = NamedRun{"turing", c.tur, run(init, c.tur, cfg)};
        c.long_run_seconds = seconds_since(t0);
    }
    return *c.long_run;
}

const NamedRun& ensure_reference_run(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    if (!c.reference_run) {
        StepperConfig cfg;
        cfg.dt = 0.1;
        cfg.t_end = 200.0;
        cfg.output_every = 10;
        cfg.keep_states = true;
        const double lambda = lambda_for_homogeneous(c.ref, c.ref_preset.z_bar, c.grid->volume());
        const State init = perturbed_equilibrium(c.grid, c.ref, lambda, 0.05, seed);
        c.reference_run = NamedRun{"reference", c.ref, run(init, c.ref, cfg)};
    }
    return *c.reference_run;
}

const std::pair<NamedRun, NamedRun>& ensure_dissipation_runs(AcceptanceSuite::Cache& c) {
    if (!c.dissipation_runs) {
        const State init = smooth_start(c.grid, c.ref, c.ref_preset.z_bar);
        StepperConfig cfg;
        cfg.t_end = 1.0;
        cfg.output_every = 1;
        cfg.keep_states = true;
        cfg.dt = 0.0025;
        NamedRun coarse{"refinement dt", c.ref, run(init, c.ref, cfg)};
        cfg.dt = 0.00125;
        NamedRun fine{"refinement dt/2", c.ref, run(init, c.ref, cfg)};
        c.dissipation_runs = std::make_pair(std::move(coarse), std::move(fine));
    }
    return *c.dissipation_runs;
}

std::vector<const NamedRun*> all_runs(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    ensure_long_run(c, seed);
    ensure_reference_run(c, seed);
    ensure_dissipation_runs(c);
    return {&*c.long_run, &*c.reference_run, &c.dissipation_runs->first, &c.dissipation_runs->second};
}

const StationaryState& ensure_pattern(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    if (!c.pattern) {
        const NamedRun& r = ensure_long_run(c, seed);
        const auto t0 = Clock::now();
        const auto zw = to_zw(r.traj.final_state.u, r.traj.final_state.v, r.p);
        c.pattern = newton_solve(zw.first, r.p, r.traj.lambda);
        c.pattern_seconds = seconds_since(t0);
    }
    return *c.pattern;
}

std::vector<AcceptanceSuite::Cache::SuiteState>& ensure_states(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    if (c.states.empty()) {
        c.states.push_back({"stable homogeneous", c.ref, Field::constant(c.grid, c.ref_preset.z_bar), std::nullopt});
        c.states.push_back({"unstable homogeneous", c.tur, Field::constant(c.grid, c.tur_preset.z_bar), std::nullopt});
        c.states.push_back({"patterned", c.tur, ensure_pattern(c, seed).z_star, std::nullopt});
    }
    for (auto& s : c.states)
        if (!s.report) s.report = spectral_report(s.z, s.p);
    return c.states;
}

// ---------------------------------------------------------------------------

CriterionResult mass_conservation(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    const NamedRun& r = ensure_long_run(c, seed);
    const double m0 = r.traj.snapshots.front().mass;
    double drift = 0.0;
    for (const auto& s : r.traj.snapshots) drift = std::max(drift, std::abs(s.mass - m0) / std::abs(m0));
    const long steps = std::lround((r.traj.final_state.t - r.traj.snapshots.front().t) / r.traj.dt);
    const bool ok = drift < 1e-10 && steps == kLongSteps && c.long_run_seconds < 30.0 &&
                    r.traj.stop_reason == "t_end";
    std::ostringstream d;
    d << "steps=" << steps << " max relative drift=" << sci(drift);
    return {1, "mass conservation", ok, d.str()};
}

CriterionResult positivity(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    bool ok = true;
    std::ostringstream d;
    for (const NamedRun* r : all_runs(c, seed)) {
        const auto& first = r->traj.snapshots.front();
        const bool start_ok = first.min_u >= 0.0 && first.min_v >= 0.0;
        const bool run_ok = start_ok && !r->traj.dt_warning && r->traj.min_u >= -kPositivityTolerance &&
                            r->traj.min_v >= -kPositivityTolerance;
        ok = ok && run_ok;
        d << r->name << ": min(u,v)=" << sci(std::min(r->traj.min_u, r->traj.min_v))
          << " dt/budget=" << sci(r->traj.dt / r->traj.dt_budget) << "; ";
    }
    return {2, "positivity", ok, d.str()};
}

CriterionResult lyapunov_decrease(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    bool ok = true;
    std::ostringstream d;
    for (const NamedRun* r : all_runs(c, seed)) {
        const double worst = r->traj.max_lyapunov_increase;
        ok = ok && worst <= 1e-8 * r->traj.dt;
        d << r->name << ": max step increase=" << sci(worst) << "; ";
    }
    const auto& [coarse, fine] = ensure_dissipation_runs(c);
    const DissipationReport a = dissipation_check(coarse.traj, coarse.p);
    const DissipationReport b = dissipation_check(fine.traj, fine.p);
    const double ratio = a.max_mismatch / b.max_mismatch;
    ok = ok && ratio >= 1.6 && ratio <= 2.4;
    d << "mismatch(dt)=" << sci(a.max_mismatch) << " mismatch(dt/2)=" << sci(b.max_mismatch) << " ratio=" << ratio;
    return {3, "Lyapunov decrease", ok, d.str()};
}

CriterionResult semi_unfolding(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    double worst_gap = std::numeric_limits<double>::infinity();
    double worst_identity = 0.0;
    long checked = 0;
    for (const NamedRun* r : all_runs(c, seed)) {
        for (const auto& snap : r->traj.snapshots) {
            if (!snap.state) continue;
            const auto [z, w] = to_zw(snap.state->u, snap.state->v, r->p);
            const SemiUnfoldingReport rep = semi_unfolding_check(z, w, r->p, r->traj.lambda);
            worst_gap = std::min(worst_gap, rep.lyapunov - rep.reduced);
            worst_identity = std::max(worst_identity, rep.identity_error);
            ++checked;
        }
    }
    const bool ok = checked > 0 && worst_gap >= -1e-10 && worst_identity < 1e-10;
    std::ostringstream d;
    d << "snapshots=" << checked << " min(L - xi J - lambda^2 k/2|Omega|)=" << sci(worst_gap)
      << " max |L(z,w_bar) - reduced|=" << sci(worst_identity);
    return {4, "semi-unfolding minimality", ok, d.str()};
}

CriterionResult convergence(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    const NamedRun& r = ensure_long_run(c, seed);
    const StationaryState& st = ensure_pattern(c, seed);
    const Grid& grid = *c.grid;
    const auto [z, w] = to_zw(r.traj.final_state.u, r.traj.final_state.v, r.p);
    const double grad_w = grid.grad_sup(w);
    const double diff = grid.norm(st.z_star - z);
    const double spread = st.z_star.max() - st.z_star.min();
    const double elapsed = c.long_run_seconds + c.pattern_seconds;
    const bool ok = grad_w < 1e-6 && st.residual_norm < 1e-10 && diff < 1e-6 && spread > 1e-3 && elapsed < 120.0;
    std::ostringstream d;
    d << "|grad w|_inf=" << sci(grad_w) << " |F(z*)|=" << sci(st.residual_norm) << " |z* - z(T)|=" << sci(diff)
      << " max z* - min z*=" << spread;
    return {5, "convergence to a stationary state", ok, d.str()};
}

CriterionResult gradient_check(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 6);
    std::uniform_real_distribution<double> level(0.5, 3.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const ModelParams& p = c.ref;
    const double lambda = lambda_for_homogeneous(p, c.ref_preset.z_bar, c.grid->volume());
    const Grid& grid = *c.grid;
    constexpr double eps = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        Field z(c.grid), phi(c.grid);
        for (int i = 0; i < grid.nodes(); ++i) {
            z[i] = level(rng);
            phi[i] = unit(rng);
        }
        const double analytic = grid.inner(j_gradient(z, p, lambda), phi);
        const double plus = j_functional(z + eps * phi, p, lambda).total;
        const double minus = j_functional(z - eps * phi, p, lambda).total;
        const double fd = (plus - minus) / (2.0 * eps);
        worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-300));
    }
    std::ostringstream d;
    d << "max relative error over 10 pairs=" << sci(worst);
    return {6, "gradient correctness", worst < 1e-5, d.str()};
}

CriterionResult homogeneous_oracle(AcceptanceSuite::Cache& c) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    const Grid& grid = *c.grid;
    for (const auto& [preset, p] : {std::make_pair(c.ref_preset, c.ref), std::make_pair(c.tur_preset, c.tur)}) {
        const Field zb = Field::constant(c.grid, preset.z_bar);
        const auto eigs_l = symmetric_eigenvalues(build_L(zb, p).symmetric);
        const auto ref_l = oracle::hessian_spectrum(preset.z_bar, p, grid.n(0), grid.length(0));
        double err_l = 0.0;
        for (std::size_t i = 0; i < eigs_l.size(); ++i) err_l = std::max(err_l, std::abs(eigs_l[i] - ref_l[i]));

        const auto eigs_a = general_eigenvalues(build_A(zb, p).restricted);
        const auto ref_a = oracle::linearization_spectrum(preset.z_bar, p, grid.n(0), grid.length(0), true);
        double err_a = eigs_a.size() == ref_a.size() ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < std::min(eigs_a.size(), ref_a.size()); ++i)
            err_a = std::max(err_a, std::abs(eigs_a[i] - ref_a[i]));
        ok = ok && err_l < 1e-10 && err_a < 1e-8;
        d << preset.name << ": L err=" << sci(err_l) << " A err=" << sci(err_a) << "; ";
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 10.0;
    return {7, "homogeneous spectral oracle", ok, d.str()};
}

CriterionResult realness(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    bool ok = true;
    std::ostringstream d;
    for (const auto& s : ensure_states(c, seed)) {
        const auto& rep = *s.report;
        double max_im = 0.0;
        for (const auto& e : rep.eigs_A)
            if (e.real() < rep.realness_threshold) max_im = std::max(max_im, std::abs(e.imag()));
        ok = ok && max_im < 1e-8 && rep.defective_clusters == 0;
        d << s.name << ": max |Im| below " << rep.realness_threshold << " = " << sci(max_im)
          << ", defective clusters=" << rep.defective_clusters << "; ";
    }
    return {8, "realness", ok, d.str()};
}

CriterionResult morse_coincidence(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    const auto& states = ensure_states(c, seed);
    bool ok = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& rep = *states[i].report;
        bool good = rep.hypothesis_holds && rep.morse_equal && rep.zero_equal;
        if (i == 0) good = good && rep.morse_L == 0;
        if (i == 1) good = good && rep.morse_L >= 1;
        ok = ok && good;
        d << states[i].name << ": morse A/L=" << rep.morse_A << "/" << rep.morse_L << " zero A/L=" << rep.zero_A << "/"
          << rep.zero_L << " xi eta2=" << rep.xi_eta2 << "; ";
    }
    return {9, "Morse index coincidence", ok, d.str()};
}

CriterionResult fixed_point(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    bool ok = true;
    std::ostringstream d;
    for (const auto& s : ensure_states(c, seed)) {
        const auto& rep = *s.report;
        std::vector<double> negatives;
        for (const auto& e : rep.eigs_A)
            if (e.real() < -rep.zero_tol_A) negatives.push_back(e.real());
        std::sort(negatives.begin(), negatives.end());
        const auto& sig = rep.fixed_point_sigmas;
        double err = negatives.size() == sig.size() ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < std::min(sig.size(), negatives.size()); ++i)
            err = std::max(err, std::abs(sig[i] - negatives[i]));
        ok = ok && err < 1e-6 && static_cast<int>(sig.size()) == rep.morse_L;
        d << s.name << ": count=" << sig.size() << " morse_L=" << rep.morse_L << " max err=" << sci(err) << "; ";
    }
    return {10, "fixed-point spectrum", ok, d.str()};
}

CriterionResult mu_monotonicity(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    constexpr int kPoints = 50;
    constexpr double kTol = 1e-10;
    bool ok = true;
    std::ostringstream d;
    for (const auto& s : ensure_states(c, seed)) {
        const MuSolver solver(s.z, s.p);
        std::vector<double> grid_s;
        std::vector<std::vector<double>> mu;
        for (int i = 1; i <= kPoints; ++i) {
            grid_s.push_back(10.0 * i / kPoints);
            mu.push_back(solver.eigenvalues(grid_s.back()));
        }
        const std::size_t jn = mu.front().size();
        int increases = 0, ratio_failures = 0, magnitude_failures = 0;
        double worst_increase = 0.0;
        int worst_j = 0;
        for (std::size_t j = 0; j < jn; ++j) {
            for (int i = 0; i + 1 < kPoints; ++i) {
                const double a = mu[i][j], b = mu[i + 1][j];
                if (b > a + kTol) {
                    ++increases;
                    if (b - a > worst_increase) worst_increase = b - a, worst_j = static_cast<int>(j) + 1;
                }
                if (a < 0.0 && b < 0.0 && !(b / grid_s[i + 1] - a / grid_s[i] > -kTol)) ++ratio_failures;
                if ((a < 0.0) == (b < 0.0) && std::abs(b) > std::abs(a) + kTol) ++magnitude_failures;
            }
        }
        ok = ok && increases == 0 && ratio_failures == 0;
        d << s.name << ": increasing steps=" << increases;
        if (increases) d << " (largest " << sci(worst_increase) << " on j=" << worst_j << ")";
        d << ", mu/s failures=" << ratio_failures << ", |mu| increases=" << magnitude_failures << "; ";
    }
    return {11, "monotonicity of mu-curves", ok, d.str()};
}

CriterionResult tau_one_limit(AcceptanceSuite::Cache& c) {
    const Kinetics kin = make_kinetics(c.tur_preset.D, c.tur_preset.alpha1, c.tur_preset.alpha2);
    const double lambda_hat = 2.0 * c.grid->volume();
    const Field guess = cosine_guess(c.grid, lambda_hat / c.grid->volume(), 0.1);
    const Field relaxed = relax_limit_flow(guess, kin, 0.1, 1e-9, 200000);
    const LimitSolution sol = limit_tau1_solve(relaxed, kin, lambda_hat);
    const bool ok = sol.multiplier_error < 1e-10 && sol.constraint_error < 1e-12;
    std::ostringstream d;
    d << "|mu + <g>|=" << sci(sol.multiplier_error) << " |int z - lambda_hat|=" << sci(sol.constraint_error)
      << " residual=" << sci(sol.residual_norm) << " range=[" << sol.z.min() << ", " << sol.z.max() << "]";
    return {12, "tau -> 1 limit", ok, d.str()};
}

CriterionResult dynamic_stability(AcceptanceSuite::Cache& c, std::uint64_t seed) {
    const StationaryState& st = ensure_pattern(c, seed);
    const ModelParams& p = c.tur;
    const Grid& grid = *c.grid;
    auto [u, v] = reconstruct_uv(st, p);

    std::mt19937_64 rng(seed + 13);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Field du(c.grid), dv(c.grid);
    for (int i = 0; i < grid.nodes(); ++i) {
        du[i] = 1e-3 * unit(rng);
        dv[i] = 1e-3 * unit(rng);
    }
    // Shift the v noise so int (u + tau v) and hence lambda are unchanged.
    const double shift = (grid.integral(du) + p.tau * grid.integral(dv)) / (p.tau * grid.volume());
    dv.values().array() -= shift;
    const State start{0.0, u + du, v + dv};

    StepperConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1000.0;
    cfg.output_every = 1000;
    const Trajectory traj = run(start, p, cfg);
    const double l_start = traj.snapshots.front().lyapunov;
    const auto [z, w] = to_zw(traj.final_state.u, traj.final_state.v, p);
    Field wb = Field::constant(c.grid, st.w_bar);
    const double dz = grid.norm(z - st.z_star);
    const double dw = grid.norm(w - wb);
    const double dist = std::sqrt(dz * dz + dw * dw);
    const double rise = traj.max_lyapunov - l_start;
    const bool ok = std::abs(traj.lambda - st.lambda) < 1e-10 && dist < 1e-4 && rise <= 1e-8;
    std::ostringstream d;
    d << "lambda drift=" << sci(std::abs(traj.lambda - st.lambda)) << " final distance=" << sci(dist)
      << " max L - L(start)=" << sci(rise);
    return {13, "dynamic stability of the pattern", ok, d.str()};
}

}  // namespace

CriterionResult AcceptanceSuite::run(int id) {
    const auto t0 = Clock::now();
    Cache& c = *cache_;
    const std::uint64_t seed = options_.seed;
    CriterionResult r;
    try {
        switch (id) {
            case 1: r = mass_conservation(c, seed); break;
            case 2: r = positivity(c, seed); break;
            case 3: r = lyapunov_decrease(c, seed); break;
            case 4: r = semi_unfolding(c, seed); break;
            case 5: r = convergence(c, seed); break;
            case 6: r = gradient_check(c, seed); break;
            case 7: r = homogeneous_oracle(c); break;
            case 8: r = realness(c, seed); break;
            case 9: r = morse_coincidence(c, seed); break;
            case 10: r = fixed_point(c, seed); break;
            case 11: r = mu_monotonicity(c, seed); break;
            case 12: r = tau_one_limit(c); break;
            case 13: r = dynamic_stability(c, seed); break;
            default: throw ConfigError("no acceptance criterion " + std::to_string(id));
        }
    } catch (const SolverError& e) {
        r = {id, "criterion " + std::to_string(id), false, std::string("solver error: ") + e.what()};
    }
    r.seconds = seconds_since(t0);
    return r;
}

std::vector<CriterionResult> AcceptanceSuite::run_all() {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCount; ++id) out.push_back(run(id));
    return out;
}

void AcceptanceSuite::write_artifacts(ArtifactSet& out) {
    Cache& c = *cache_;
    if (c.long_run) out.write("turing_timeseries.csv", timeseries_csv(c.long_run->traj));
    if (c.reference_run) out.write("reference_timeseries.csv", timeseries_csv(c.reference_run->traj));
    if (c.pattern) {
        const auto [u, v] = reconstruct_uv(*c.pattern, c.tur);
        out.write("pattern_fields.csv", fields_csv(u, v, c.tur));
    }
    for (const auto& s : c.states) {
        if (!s.report) continue;
        std::string slug = s.name;
        std::replace(slug.begin(), slug.end(), ' ', '_');
        out.write_json("spectrum_" + slug + ".json", spectrum_json(*s.report));
    }
}

std::string format_result(const CriterionResult& r) {
    std::ostringstream o;
    o << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.title << ": " << r.detail;
    return o.str();
}

std::string results_csv(const std::vector<CriterionResult>& results) {
    std::ostringstream o;
    o << "id,title,passed,detail\n";
    for (const auto& r : results) {
        std::string detail = r.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        o << r.id << ",\"" << r.title << "\"," << (r.passed ? 1 : 0) << ",\"" << detail << "\"\n";
    }
    return o.str();
}

}  // namespace mcrd::app
