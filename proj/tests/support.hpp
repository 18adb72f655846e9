#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace testing {

inline mcrd::ModelParams reference_params() { return mcrd::derive_params(0.25, 2.0, 1.0, 1.0); }
inline mcrd::ModelParams turing_params() { return mcrd::derive_params(0.002, 2.0, 1.0, 1.0); }

inline mcrd::Field random_field(const mcrd::GridPtr& grid, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    Eigen::VectorXd v(grid->nodes());
    for (auto& x : v) x = d(rng);
    return mcrd::Field(grid, v);
}

inline double max_abs(const mcrd::Field& f) { return f.values().cwiseAbs().maxCoeff(); }

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
    const auto rule = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    const std::function<double(double, double, double, double, int)> rec = [&](double lo, double hi, double whole,
                                                                              double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double left = rule(lo, mid);
        const double right = rule(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, left, 0.5 * eps, d - 1) + rec(mid, hi, right, 0.5 * eps, d - 1);
    };
    return rec(a, b, rule(a, b), tol, depth);
}

// Sign-change scan on a fine grid followed by bisection to machine precision.
inline std::vector<double> scan_roots(const std::function<double(double)>& f, double a, double b, int samples) {
    std::vector<double> roots;
    double x0 = a;
    double f0 = f(a);
    if (f0 == 0.0) roots.push_back(a);
    for (int i = 1; i <= samples; ++i) {
        const double x1 = a + (b - a) * i / samples;
        const double f1 = f(x1);
        if (f1 == 0.0) {
            roots.push_back(x1);
        } else if (f0 * f1 < 0.0) {
            double lo = x0, hi = x1, flo = f0;
            for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++k) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

// Eigenvalues of -Lap_h on a node-centred Neumann grid with n nodes.
inline std::vector<double> neumann_dispersion(int n, double length) {
    const double h = length / (n - 1);
    std::vector<double> eta;
    for (int m = 0; m < n; ++m) {
        const double s = std::sin(M_PI * m * h / (2.0 * length));
        eta.push_back(4.0 / (h * h) * s * s);
    }
    return eta;
}

}  // namespace testing
