#pragma once

#include <utility>

#include "mcrd/grid.hpp"

namespace mcrd {

/// Reaction constants. Enough to evaluate h, g and G; the time constant tau
/// only enters through ModelParams.
struct Kinetics {
    double D = 0.0;       ///< diffusion coefficient of u (v diffuses with 1)
    double alpha1 = 0.0;  ///< reaction rate
    double alpha2 = 0.0;  ///< saturation constant
    double k = 0.0;       ///< always equal to alpha1
};

/// Kinetics plus tau and the two derived constants of the (z, w) formulation:
///   xi    = (1 - tau D) / (tau - 1)
///   alpha = (1 - D) / (tau - 1)
/// Both are strictly positive for every accepted parameter set.
struct ModelParams : Kinetics {
    double tau = 0.0;
    double xi = 0.0;
    double alpha = 0.0;
};

/// Validates the physical constants and derives k, xi, alpha.
/// Throws ConfigError when tau == 1, when any constant is nonpositive, or
/// when xi <= 0 or alpha <= 0 (requires tau > 1 > tau D or tau D > 1 > tau).
ModelParams derive_params(double D, double tau, double alpha1, double alpha2);

/// Kinetics for the tau -> 1 limit problem, where only D enters.
Kinetics make_kinetics(double D, double alpha1, double alpha2);

// h(z) = -alpha1 z / (alpha2 z + 1)^2
double h(double z, const Kinetics& p);
double h_prime(double z, const Kinetics& p);

// g(z) = (1 - D) h(z) - k D z, and its antiderivative G with G(0) = 0.
double g(double z, const Kinetics& p);
double g_prime(double z, const Kinetics& p);
double G(double z, const Kinetics& p);

/// Reaction term of the original system, f(u, v) = h(u + v) + k v.
double reaction(double u, double v, const Kinetics& p);

/// (u, v) -> (z, w) = (u + v, D u + v), pointwise.
std::pair<Field, Field> to_zw(const Field& u, const Field& v, const Kinetics& p);

/// Inverse map u = (w - z)/(D - 1), v = (D z - w)/(D - 1). Rejects D == 1.
std::pair<Field, Field> from_zw(const Field& z, const Field& w, const Kinetics& p);

/// Pointwise g, g' and G over a field.
Field g_field(const Field& z, const Kinetics& p);
Field g_prime_field(const Field& z, const Kinetics& p);
Field G_field(const Field& z, const Kinetics& p);

}  // namespace mcrd
