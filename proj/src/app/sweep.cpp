#include "mcrd/app/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include "mcrd/errors.hpp"
#include "mcrd/spectra.hpp"

namespace mcrd::app {

int worker_count() {
    const char* env = std::getenv("RDCLI_WORKERS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw ConfigError("RDCLI_WORKERS must be an integer in [1, 1024]");
    return static_cast<int>(n);
}

namespace {

// Free text inside an unquoted CSV cell.
std::string csv_text(std::string s) {
    for (char& ch : s)
        if (ch == '"' || ch == ',' || ch == '\n') ch = ' ';
    return s;
}

std::string point_name(int index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "point_%04d%s", index, suffix);
    return buf;
}

json point_json(const SweepPoint& pt) {
    return {{"index", pt.index},
            {"D", pt.D},
            {"tau", pt.tau},
            {"z_bar", std::isnan(pt.z_bar) ? json(nullptr) : json(pt.z_bar)},
            {"lambda", pt.lambda},
            {"status", pt.status},
            {"reason", pt.reason},
            {"xi", pt.xi},
            {"alpha", pt.alpha},
            {"roots", pt.roots},
            {"morse_L", pt.morse_L},
            {"morse_A", pt.morse_A},
            {"zero_L", pt.zero_L},
            {"zero_A", pt.zero_A},
            {"xi_eta2_gt_k", pt.hypothesis},
            {"patterned", pt.patterned},
            {"z_spread", pt.z_spread},
            {"stop_reason", pt.stop_reason}};
}

SweepPoint evaluate(const RunConfig& cfg, const GridPtr& grid, SweepPoint pt, ArtifactSet* out) {
    ModelParams p;
    try {
        p = derive_params(pt.D, pt.tau, cfg.alpha1, cfg.alpha2);
    } catch (const ConfigError& e) {
        pt.status = "skipped";
        pt.reason = e.what();
        if (out) out->write_json(point_name(pt.index, ".json"), point_json(pt));
        return pt;
    }
    pt.xi = p.xi;
    pt.alpha = p.alpha;
    try {
        if (!std::isnan(pt.z_bar)) pt.lambda = lambda_for_homogeneous(p, pt.z_bar, grid->volume());
        pt.roots = homogeneous_roots(p, pt.lambda, grid->volume());
        if (pt.roots.empty()) throw SolverError("no homogeneous root");
        const double level = std::isnan(pt.z_bar) ? pt.roots.front() : pt.z_bar;

        const SpectrumReport rep = spectrum_counts(Field::constant(grid, level), p);
        pt.morse_L = rep.morse_L;
        pt.morse_A = rep.morse_A;
        pt.zero_L = rep.zero_L;
        pt.zero_A = rep.zero_A;
        pt.hypothesis = rep.hypothesis_holds;

        StepperConfig sc = cfg.stepper;
        sc.t_end = cfg.sweep.relax_t_end;
        const State init = perturbed_equilibrium(grid, p, pt.lambda, sc.perturbation, sc.seed);
        const Trajectory traj = run(init, p, sc);
        pt.stop_reason = traj.stop_reason;
        if (traj.stop_reason.rfind("diverged", 0) == 0) throw SolverError(traj.stop_reason);
        const Field z = traj.final_state.u + traj.final_state.v;
        pt.z_spread = z.max() - z.min();
        pt.patterned = pt.z_spread > cfg.sweep.pattern_tol;
        pt.status = "done";
        if (out) out->write(point_name(pt.index, "_fields.csv"), fields_csv(traj.final_state.u, traj.final_state.v, p));
    } catch (const std::exception& e) {
        pt.status = "failed";
        pt.reason = e.what();
    }
    if (out) out->write_json(point_name(pt.index, ".json"), point_json(pt));
    return pt;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, ArtifactSet* point_artifacts) {
    const std::vector<double> d_axis = cfg.sweep.D.values.empty() ? std::vector<double>{cfg.D} : cfg.sweep.D.values;
    const std::vector<double> tau_axis =
        cfg.sweep.tau.values.empty() ? std::vector<double>{cfg.tau} : cfg.sweep.tau.values;
    // Each level is either a homogeneous z_bar or, with z_bar = NaN, a lambda.
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> level_axis;
    for (double z : cfg.sweep.z_bar.values) level_axis.emplace_back(z, 0.0);
    for (double l : cfg.sweep.lambda.values) level_axis.emplace_back(kNaN, l);
    if (level_axis.empty()) {
        if (cfg.z_bar) level_axis = {{*cfg.z_bar, 0.0}};
        else if (cfg.lambda) level_axis = {{kNaN, *cfg.lambda}};
        else throw ConfigError("sweep needs sweep.z_bar, sweep.lambda, initial.z_bar or initial.lambda");
    }

    std::vector<SweepPoint> points;
    for (double d : d_axis)
        for (double tau : tau_axis)
            for (const auto& [z_bar, lambda] : level_axis) {
                SweepPoint pt;
                pt.index = static_cast<int>(points.size());
                pt.D = d;
                pt.tau = tau;
                pt.z_bar = z_bar;
                pt.lambda = lambda;
                points.push_back(pt);
            }

    const GridPtr grid = cfg.make_grid();
    const int workers = std::min<int>(worker_count(), static_cast<int>(points.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) points[i] = evaluate(cfg, grid, points[i], point_artifacts);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream o;
    o << "index,D,tau,z_bar,lambda,status,xi,alpha,roots,morse_L,morse_A,zero_L,zero_A,xi_eta2_gt_k,patterned,"
         "z_spread,stop_reason,reason\n";
    for (const auto& pt : points) {
        std::string roots;
        for (std::size_t i = 0; i < pt.roots.size(); ++i) roots += (i ? ";" : "") + fmt_double(pt.roots[i]);
        const std::string reason = csv_text(pt.reason);
        o << pt.index << ',' << fmt_double(pt.D) << ',' << fmt_double(pt.tau) << ','
          << (std::isnan(pt.z_bar) ? "" : fmt_double(pt.z_bar)) << ',' << fmt_double(pt.lambda) << ',' << pt.status
          << ',' << fmt_double(pt.xi) << ',' << fmt_double(pt.alpha) << ',' << roots << ',' << pt.morse_L << ','
          << pt.morse_A << ',' << pt.zero_L << ',' << pt.zero_A << ',' << (pt.hypothesis ? 1 : 0) << ','
          << (pt.patterned ? 1 : 0) << ',' << fmt_double(pt.z_spread) << ',' << csv_text(pt.stop_reason) << ',' << reason
          << '\n';
    }
    return o.str();
}

}  // namespace mcrd::app
