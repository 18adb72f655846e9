#include "mcrd/model.hpp"

#include <cmath>
#include <sstream>

#include "mcrd/errors.hpp"

namespace mcrd {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name << " must be positive and finite (got " << value << ")";
        throw ConfigError(msg.str());
    }
}

}  // namespace

Kinetics make_kinetics(double D, double alpha1, double alpha2) {
    require_positive(D, "D");
    require_positive(alpha1, "alpha1");
    require_positive(alpha2, "alpha2");
    return Kinetics{D, alpha1, alpha2, alpha1};
}

ModelParams derive_params(double D, double tau, double alpha1, double alpha2) {
    ModelParams p;
    static_cast<Kinetics&>(p) = make_kinetics(D, alpha1, alpha2);
    require_positive(tau, "tau");
    if (tau == 1.0) throw ConfigError("tau == 1: the (z, w) change of variables is undefined");
    if (D == 1.0) throw ConfigError("D == 1 forces alpha = 0, violating alpha > 0");
    p.tau = tau;
    p.xi = (1.0 - tau * D) / (tau - 1.0);
    p.alpha = (1.0 - D) / (tau - 1.0);
    if (!(p.xi > 0.0) || !(p.alpha > 0.0)) {
        std::ostringstream msg;
        msg << "parameter hypothesis violated: need xi > 0 and alpha > 0 (tau > 1 > tau D or "
               "tau D > 1 > tau), got xi = "
            << p.xi << ", alpha = " << p.alpha;
        throw ConfigError(msg.str());
    }
    return p;
}

double h(double z, const Kinetics& p) {
    const double s = p.alpha2 * z + 1.0;
    return -p.alpha1 * z / (s * s);
}

double h_prime(double z, const Kinetics& p) {
    const double s = p.alpha2 * z + 1.0;
    return -p.alpha1 * (1.0 - p.alpha2 * z) / (s * s * s);
}

double g(double z, const Kinetics& p) { return (1.0 - p.D) * h(z, p) - p.k * p.D * z; }

double g_prime(double z, const Kinetics& p) { return (1.0 - p.D) * h_prime(z, p) - p.k * p.D; }

double G(double z, const Kinetics& p) {
    // int_0^z h = -(alpha1 / alpha2^2) [ln(1 + x) - x / (1 + x)],  x = alpha2 z
    const double x = p.alpha2 * z;
    const double bracket = std::log1p(x) - x / (1.0 + x);
    return -(1.0 - p.D) * p.alpha1 / (p.alpha2 * p.alpha2) * bracket - 0.5 * p.k * p.D * z * z;
}

double reaction(double u, double v, const Kinetics& p) { return h(u + v, p) + p.k * v; }

std::pair<Field, Field> to_zw(const Field& u, const Field& v, const Kinetics& p) {
    u.require_same_grid(v);
    Field z = u + v;
    Field w(u.grid_ptr(), p.D * u.values() + v.values());
    return {std::move(z), std::move(w)};
}

std::pair<Field, Field> from_zw(const Field& z, const Field& w, const Kinetics& p) {
    z.require_same_grid(w);
    if (p.D == 1.0) throw ConfigError("from_zw: D == 1 makes the transform singular");
    const double inv = 1.0 / (p.D - 1.0);
    Field u(z.grid_ptr(), (w.values() - z.values()) * inv);
    Field v(z.grid_ptr(), (p.D * z.values() - w.values()) * inv);
    return {std::move(u), std::move(v)};
}

Field g_field(const Field& z, const Kinetics& p) {
    return Field(z.grid_ptr(), z.values().unaryExpr([&](double s) { return g(s, p); }));
}

Field g_prime_field(const Field& z, const Kinetics& p) {
    return Field(z.grid_ptr(), z.values().unaryExpr([&](double s) { return g_prime(s, p); }));
}

Field G_field(const Field& z, const Kinetics& p) {
    return Field(z.grid_ptr(), z.values().unaryExpr([&](double s) { return G(s, p); }));
}

}  // namespace mcrd
