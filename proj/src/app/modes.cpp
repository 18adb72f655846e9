#include "mcrd/app/modes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "mcrd/app/acceptance.hpp"
#include "mcrd/app/output.hpp"
#include "mcrd/app/plot.hpp"
#include "mcrd/app/sweep.hpp"
#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/spectra.hpp"

namespace fs = std::filesystem;

namespace mcrd::app {

json error_record(int code, const std::string& kind, const std::string& message) {
    return {{"status", code}, {"kind", kind}, {"message", message}};
}

namespace {

struct Context {
    RunConfig cfg;
    std::string mode;
    bool plots = true;
};

// First-axis profile (the y = 0 row on 2D grids).
std::vector<double> row_x(const Grid& grid) {
    std::vector<double> x;
    for (int i = 0; i < grid.n(0); ++i) x.push_back(grid.position(i)[0]);
    return x;
}

std::vector<double> row_values(const Field& f) {
    std::vector<double> y;
    for (int i = 0; i < f.grid().n(0); ++i) y.push_back(f[i]);
    return y;
}

std::string profile_svg(const std::string& title, const Field& u, const Field& v, const ModelParams& p) {
    const auto [z, w] = to_zw(u, v, p);
    const auto x = row_x(u.grid());
    PlotSpec spec{title, "x", "value", {}, false};
    spec.series.push_back({"u", x, row_values(u), false});
    spec.series.push_back({"v", x, row_values(v), false});
    spec.series.push_back({"z = u + v", x, row_values(z), false});
    return render_svg(spec);
}

std::string lyapunov_svg(const Trajectory& traj) {
    PlotSpec spec{"Lyapunov functional", "t", "L", {}, false};
    Series s{"L(z, w)", {}, {}, false};
    for (const auto& snap : traj.snapshots) {
        s.x.push_back(snap.t);
        s.y.push_back(snap.lyapunov);
    }
    spec.series.push_back(std::move(s));
    return render_svg(spec);
}

json trajectory_summary(const Trajectory& traj) {
    const double m0 = traj.snapshots.front().mass;
    double drift = 0.0;
    for (const auto& s : traj.snapshots) drift = std::max(drift, std::abs(s.mass - m0) / std::abs(m0));
    return {{"stop_reason", traj.stop_reason},
            {"t_final", traj.final_state.t},
            {"lambda", traj.lambda},
            {"dt", traj.dt},
            {"dt_budget", traj.dt_budget},
            {"dt_warning", traj.dt_warning},
            {"positivity_violated", traj.positivity_violated},
            {"min_u", traj.min_u},
            {"min_v", traj.min_v},
            {"max_relative_mass_drift", drift},
            {"max_lyapunov_increase", traj.max_lyapunov_increase},
            {"final_grad_w_inf", traj.snapshots.back().grad_w_inf},
            {"snapshots", traj.snapshots.size()}};
}

void finish_manifest(ArtifactSet& out, json manifest) {
    json files = json::object();
    for (const auto& [name, digest] : out.digests()) files[name] = digest;
    manifest["artifacts"] = files;
    manifest["csv_digests"] = out.csv_digests();
    out.write_json("manifest.json", manifest);
}

Trajectory relax(const Context& ctx, const GridPtr& grid, const ModelParams& p, double lambda, double t_end,
                 double settle_tol) {
    StepperConfig sc = ctx.cfg.stepper;
    sc.t_end = t_end;
    sc.settle_tol = settle_tol;
    const State init = perturbed_equilibrium(grid, p, lambda, sc.perturbation, sc.seed);
    Trajectory traj = run(init, p, sc);
    if (traj.stop_reason.rfind("diverged", 0) == 0) throw SolverError(traj.stop_reason);
    return traj;
}

double homogeneous_level(const RunConfig& cfg, const ModelParams& p, const Grid& grid, double lambda) {
    if (cfg.z_bar) return *cfg.z_bar;
    const auto roots = homogeneous_roots(p, lambda, grid.volume());
    if (roots.empty()) throw SolverError("no homogeneous root for lambda = " + fmt_double(lambda));
    return roots.front();
}

struct StationaryRun {
    StationaryState state;
    std::optional<Trajectory> relaxation;
    double level = 0.0;
};

StationaryRun solve_stationary(const Context& ctx, const GridPtr& grid, const ModelParams& p, double lambda) {
    const auto& st = ctx.cfg.stationary;
    StationaryRun out;
    out.level = homogeneous_level(ctx.cfg, p, *grid, lambda);
    Field guess;
    if (st.guess == "homogeneous") {
        guess = Field::constant(grid, out.level);
    } else if (st.guess == "cosine") {
        guess = cosine_guess(grid, out.level, st.amplitude);
    } else {
        out.relaxation = relax(ctx, grid, p, lambda, st.relax_t_end, st.settle_tol);
        guess = out.relaxation->final_state.u + out.relaxation->final_state.v;
    }
    out.state = newton_solve(guess, p, lambda, st.newton);
    if (grid->nodes() <= 1024) out.state.morse_index = spectrum_counts(out.state.z_star, p).morse_L;
    return out;
}

int mode_simulate(const Context& ctx, ArtifactSet& out) {
    const ModelParams p = ctx.cfg.params();
    const GridPtr grid = ctx.cfg.make_grid();
    const double lambda = ctx.cfg.resolve_lambda(p, *grid);
    const State init = perturbed_equilibrium(grid, p, lambda, ctx.cfg.stepper.perturbation, ctx.cfg.stepper.seed);
    const Trajectory traj = run(init, p, ctx.cfg.stepper);

    out.write("timeseries.csv", timeseries_csv(traj));
    out.write("fields_initial.csv", fields_csv(init.u, init.v, p));
    out.write("fields_final.csv", fields_csv(traj.final_state.u, traj.final_state.v, p));
    if (ctx.plots) {
        out.write("profile.svg", profile_svg("Final profile", traj.final_state.u, traj.final_state.v, p));
        out.write("lyapunov.svg", lyapunov_svg(traj));
    }
    json manifest = manifest_base(to_json(ctx.cfg), p, *grid, lambda);
    manifest["mode"] = ctx.mode;
    manifest["run"] = trajectory_summary(traj);
    finish_manifest(out, manifest);
    if (traj.stop_reason.rfind("diverged", 0) == 0) throw SolverError(traj.stop_reason);
    return kExitOk;
}

json stationary_json(const StationaryRun& r, const ModelParams& p, const Grid& grid) {
    const auto& s = r.state;
    const double mass_error = std::abs(mass_lambda(s.z_star, Field::constant(s.z_star.grid_ptr(), s.w_bar), p) - s.lambda);
    json j = {{"residual_norm", s.residual_norm},
              {"iterations", s.iterations},
              {"residual_history", s.residual_history},
              {"j_value", s.j_value},
              {"w_bar", s.w_bar},
              {"lambda", s.lambda},
              {"mass_relation_error", mass_error},
              {"z_min", s.z_star.min()},
              {"z_max", s.z_star.max()},
              {"homogeneous_level", r.level},
              {"homogeneous_roots", homogeneous_roots(p, s.lambda, grid.volume())}};
    j["morse_index"] = s.morse_index ? json(*s.morse_index) : json(nullptr);
    if (r.relaxation) j["relaxation"] = trajectory_summary(*r.relaxation);
    return j;
}

void write_stationary(const StationaryRun& r, const ModelParams& p, const Context& ctx, ArtifactSet& out) {
    const auto [u, v] = reconstruct_uv(r.state, p);
    out.write("stationary_fields.csv", fields_csv(u, v, p));
    std::ostringstream hist;
    hist << "iteration,residual\n";
    for (std::size_t i = 0; i < r.state.residual_history.size(); ++i)
        hist << i << ',' << fmt_double(r.state.residual_history[i]) << '\n';
    out.write("newton_history.csv", hist.str());
    if (r.relaxation) out.write("relaxation_timeseries.csv", timeseries_csv(*r.relaxation));
    if (ctx.plots) out.write("stationary_profile.svg", profile_svg("Stationary state", u, v, p));
}

int mode_stationary(const Context& ctx, ArtifactSet& out) {
    const ModelParams p = ctx.cfg.params();
    const GridPtr grid = ctx.cfg.make_grid();
    const double lambda = ctx.cfg.resolve_lambda(p, *grid);
    const StationaryRun r = solve_stationary(ctx, grid, p, lambda);
    write_stationary(r, p, ctx, out);
    json manifest = manifest_base(to_json(ctx.cfg), p, *grid, lambda);
    manifest["mode"] = ctx.mode;
    manifest["stationary"] = stationary_json(r, p, *grid);
    finish_manifest(out, manifest);
    return kExitOk;
}

std::string spectrum_svg(const SpectrumReport& rep) {
    // The lowest part of the spectrum; the stiff tail would flatten the plot.
    const std::size_t shown = std::min<std::size_t>(rep.eigs_A.size(), 40);
    PlotSpec spec{"Spectrum of the linearization (lowest modes)", "Re sigma", "Im sigma", {}, true};
    Series a{"restricted A", {}, {}, true};
    for (std::size_t i = 0; i < shown; ++i) {
        a.x.push_back(rep.eigs_A[i].real());
        a.y.push_back(rep.eigs_A[i].imag());
    }
    Series l{"Hessian", {}, {}, true};
    for (std::size_t i = 0; i < std::min<std::size_t>(rep.eigs_L.size(), 40); ++i) {
        l.x.push_back(rep.eigs_L[i]);
        l.y.push_back(0.0);
    }
    spec.series.push_back(std::move(a));
    spec.series.push_back(std::move(l));
    return render_svg(spec);
}

std::string mu_svg(const MuCurve& curve, const std::vector<double>& s_grid) {
    PlotSpec spec{"Weighted eigenvalue curves", "s", "mu_j(s)", {}, true};
    for (int j = 1; j <= curve.j_max; ++j) spec.series.push_back({"j = " + std::to_string(j), s_grid, curve.curve(j), false});
    return render_svg(spec);
}

int mode_spectrum(const Context& ctx, ArtifactSet& out) {
    const ModelParams p = ctx.cfg.params();
    const GridPtr grid = ctx.cfg.make_grid();
    const double lambda = ctx.cfg.resolve_lambda(p, *grid);
    json manifest = manifest_base(to_json(ctx.cfg), p, *grid, lambda);
    manifest["mode"] = ctx.mode;

    Field z;
    if (ctx.cfg.spectrum.state == "homogeneous") {
        const double level = homogeneous_level(ctx.cfg, p, *grid, lambda);
        z = Field::constant(grid, level);
        manifest["state"] = {{"kind", "homogeneous"}, {"z_bar", level}};
    } else {
        const StationaryRun r = solve_stationary(ctx, grid, p, lambda);
        write_stationary(r, p, ctx, out);
        z = r.state.z_star;
        manifest["state"] = {{"kind", "stationary"}, {"stationary", stationary_json(r, p, *grid)}};
    }

    const SpectrumReport rep = spectral_report(z, p);
    const auto& sp = ctx.cfg.spectrum;
    std::vector<double> s_grid;
    for (int i = 0; i < sp.s_count; ++i)
        s_grid.push_back(sp.s_count == 1 ? sp.s_min : sp.s_min + (sp.s_max - sp.s_min) * i / (sp.s_count - 1));
    const MuCurve curve = mu_curve(z, p, s_grid, std::min(sp.j_max, grid->nodes()));

    json report = spectrum_json(rep);
    report["mu_curve"] = mu_curve_json(curve);
    out.write_json("spectrum.json", report);
    out.write("mu_curves.csv", mu_curve_csv(curve));
    std::ostringstream ea, el;
    ea << "re,im\n";
    for (const auto& e : rep.eigs_A) ea << fmt_double(e.real()) << ',' << fmt_double(e.imag()) << '\n';
    el << "mu\n";
    for (double e : rep.eigs_L) el << fmt_double(e) << '\n';
    out.write("eigs_A.csv", ea.str());
    out.write("eigs_L.csv", el.str());
    if (ctx.plots) {
        out.write("spectrum.svg", spectrum_svg(rep));
        out.write("mu_curves.svg", mu_svg(curve, s_grid));
    }
    manifest["spectrum"] = {{"morse_A", rep.morse_A},
                            {"morse_L", rep.morse_L},
                            {"zero_A", rep.zero_A},
                            {"zero_L", rep.zero_L},
                            {"realness_ok", rep.realness_ok},
                            {"comparison_ok", rep.comparison_ok},
                            {"hypothesis_holds", rep.hypothesis_holds},
                            {"max_rayleigh_error", curve.max_rayleigh_error}};
    finish_manifest(out, manifest);
    return kExitOk;
}

int mode_sweep(const Context& ctx, ArtifactSet& out) {
    const GridPtr grid = ctx.cfg.make_grid();
    const auto points = run_sweep(ctx.cfg, ctx.cfg.sweep.point_artifacts ? &out : nullptr);
    out.write("sweep.csv", sweep_csv(points));
    int done = 0, skipped = 0, failed = 0;
    for (const auto& pt : points) {
        done += pt.status == "done";
        skipped += pt.status == "skipped";
        failed += pt.status == "failed";
    }
    if (ctx.plots) {
        PlotSpec spec{"Homogeneous-state Morse index across the sweep", "D", "morse index", {}, false};
        Series l{"Hessian", {}, {}, true}, a{"linearization", {}, {}, true};
        for (const auto& pt : points) {
            if (pt.status != "done") continue;
            l.x.push_back(pt.D);
            l.y.push_back(pt.morse_L);
            a.x.push_back(pt.D);
            a.y.push_back(pt.morse_A);
        }
        spec.series = {l, a};
        out.write("sweep_morse.svg", render_svg(spec));
    }
    json manifest = {{"config", to_json(ctx.cfg)},
                     {"mode", ctx.mode},
                     {"grid_eta2", grid->eta2()},
                     {"workers", worker_count()},
                     {"points", points.size()},
                     {"done", done},
                     {"skipped", skipped},
                     {"failed", failed},
                     {"rng", {{"generator", "mt19937_64"}, {"distribution", "uniform(-1,1)"}}}};
    finish_manifest(out, manifest);
    return kExitOk;
}

int mode_limit(const Context& ctx, ArtifactSet& out) {
    if (!(ctx.cfg.D > 0.0)) throw ConfigError("params.D must be positive");
    const Kinetics kin = make_kinetics(ctx.cfg.D, ctx.cfg.alpha1, ctx.cfg.alpha2);
    const GridPtr grid = ctx.cfg.make_grid();
    const auto& li = ctx.cfg.limit;
    Field guess = cosine_guess(grid, li.lambda_hat / grid->volume(), li.amplitude);
    if (li.relax_steps > 0) guess = relax_limit_flow(guess, kin, li.relax_dt, li.relax_tol, li.relax_steps);
    const LimitSolution sol = limit_tau1_solve(guess, kin, li.lambda_hat, ctx.cfg.stationary.newton);

    std::ostringstream csv;
    csv << (grid->dim() == 1 ? "x,z\n" : "x,y,z\n");
    for (int i = 0; i < grid->nodes(); ++i) {
        const auto pos = grid->position(i);
        csv << fmt_double(pos[0]) << ',';
        if (grid->dim() == 2) csv << fmt_double(pos[1]) << ',';
        csv << fmt_double(sol.z[i]) << '\n';
    }
    out.write("limit_fields.csv", csv.str());
    if (ctx.plots) {
        PlotSpec spec{"Limit problem solution", "x", "z", {}, false};
        spec.series.push_back({"z", row_x(*grid), row_values(sol.z), false});
        out.write("limit_profile.svg", render_svg(spec));
    }
    json manifest = {{"config", to_json(ctx.cfg)},
                     {"mode", ctx.mode},
                     {"limit",
                      {{"lambda_hat", sol.lambda_hat},
                       {"mu", sol.mu},
                       {"residual_norm", sol.residual_norm},
                       {"constraint_error", sol.constraint_error},
                       {"multiplier_error", sol.multiplier_error},
                       {"j_hat", sol.j_hat},
                       {"iterations", sol.iterations},
                       {"z_min", sol.z.min()},
                       {"z_max", sol.z.max()}}}};
    finish_manifest(out, manifest);
    return kExitOk;
}

int mode_verify(const Context& ctx, ArtifactSet& out) {
    SuiteOptions opt;
    opt.n = ctx.cfg.verify.n;
    opt.seed = ctx.cfg.stepper.seed;
    AcceptanceSuite suite(opt);
    std::vector<CriterionResult> results;
    bool all = true;
    for (int id = 1; id <= AcceptanceSuite::kCount; ++id) {
        results.push_back(suite.run(id));
        all = all && results.back().passed;
        std::cout << format_result(results.back()) << std::endl;
    }
    out.write("acceptance.csv", results_csv(results));
    suite.write_artifacts(out);

    json timing = json::array();
    for (const auto& r : results) timing.push_back({{"id", r.id}, {"passed", r.passed}, {"seconds", r.seconds}});
    json manifest = {{"config", to_json(ctx.cfg)}, {"mode", ctx.mode}, {"all_passed", all}, {"criteria", timing}};
    finish_manifest(out, manifest);
    return all ? kExitOk : kExitInvariant;
}

}  // namespace

int run_mode(const std::string& mode, RunConfig cfg, const RunOptions& options) {
    if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end()) throw ConfigError("unknown mode " + mode);
    if (!cfg.mode.empty() && cfg.mode != mode)
        throw ConfigError("config is for mode " + cfg.mode + " but " + mode + " was requested");
    cfg.mode = mode;
    if (options.seed) cfg.stepper.seed = *options.seed;
    if (options.out_dir) cfg.output_dir = options.out_dir->string();

    Context ctx{cfg, mode, options.plots};
    ArtifactSet out(cfg.output_dir);
    if (mode == "simulate") return mode_simulate(ctx, out);
    if (mode == "stationary") return mode_stationary(ctx, out);
    if (mode == "spectrum") return mode_spectrum(ctx, out);
    if (mode == "sweep") return mode_sweep(ctx, out);
    if (mode == "limit-tau1") return mode_limit(ctx, out);
    return mode_verify(ctx, out);
}

}  // namespace mcrd::app
