#include "mcrd/energy.hpp"

#include <cmath>
#include <sstream>

#include "mcrd/errors.hpp"

namespace mcrd {

double EnergyBreakdown::part(const std::string& name) const {
    for (const auto& [key, value] : parts)
        if (key == name) return value;
    throw ConfigError("no energy contribution named '" + name + "'");
}

namespace {

EnergyBreakdown summed(std::vector<std::pair<std::string, double>> parts) {
    EnergyBreakdown e;
    for (const auto& part : parts) e.total += part.second;
    e.parts = std::move(parts);
    return e;
}

}  // namespace

EnergyBreakdown lyapunov(const Field& z, const Field& w, const ModelParams& p) {
    z.require_same_grid(w);
    const Grid& grid = z.grid();
    return summed({
        {"grad_w", 0.5 * (p.alpha + p.D) * grid.grad_norm_sq(w)},
        {"w_sq", 0.5 * p.k * grid.inner(w, w)},
        {"grad_z", 0.5 * p.xi * p.D * grid.grad_norm_sq(z)},
        {"potential", -p.xi * grid.integral(G_field(z, p))},
    });
}

EnergyBreakdown j_functional(const Field& z, const ModelParams& p, double lambda) {
    const Grid& grid = z.grid();
    const double vol = grid.volume();
    const double mass = grid.integral(z);
    return summed({
        {"grad_z", 0.5 * p.D * grid.grad_norm_sq(z)},
        {"potential", -grid.integral(G_field(z, p))},
        {"linear", -p.k * lambda / vol * mass},
        {"nonlocal", 0.5 * p.k * p.xi / vol * mass * mass},
    });
}

Field j_gradient(const Field& z, const ModelParams& p, double lambda) {
    const Grid& grid = z.grid();
    const double nonlocal = p.k / grid.volume() * (lambda - p.xi * grid.integral(z));
    Field out = grid.laplacian(z);
    out *= p.D;
    out += g_field(z, p);
    out.values().array() += nonlocal;
    out *= -1.0;
    return out;
}

double mass_lambda(const Field& z, const Field& w, const ModelParams& p) {
    const Grid& grid = z.grid();
    return p.xi * grid.integral(z) + grid.integral(w);
}

double w_bar(const Field& z, const ModelParams& p, double lambda) {
    const Grid& grid = z.grid();
    return (lambda - p.xi * grid.integral(z)) / grid.volume();
}

SemiUnfoldingReport semi_unfolding_check(const Field& z, const Field& w, const ModelParams& p, double lambda,
                                         double mass_tolerance) {
    const double mass = mass_lambda(z, w, p);
    if (!(std::abs(mass - lambda) <= mass_tolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "mass constraint violated: int(xi z + w) = " << mass << " but lambda = " << lambda;
        throw ConfigError(msg.str());
    }
    const Grid& grid = z.grid();
    const double wb = w_bar(z, p, lambda);
    const Field w_avg = Field::constant(z.grid_ptr(), wb);

    SemiUnfoldingReport r;
    r.lyapunov = lyapunov(z, w, p).total;
    r.lyapunov_averaged = lyapunov(z, w_avg, p).total;
    r.reduced = p.xi * j_functional(z, p, lambda).total + lambda * lambda * p.k / (2.0 * grid.volume());
    r.gap = r.lyapunov - r.lyapunov_averaged;
    const Field dev = w - w_avg;
    r.predicted_gap = 0.5 * p.k * grid.inner(dev, dev) + 0.5 * (p.alpha + p.D) * grid.grad_norm_sq(w);
    r.identity_error = std::abs(r.lyapunov_averaged - r.reduced);
    r.inequality_holds = r.lyapunov - r.reduced >= -1e-10;
    return r;
}

}  // namespace mcrd
