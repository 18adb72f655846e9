#include "mcrd/app/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mcrd::app::oracle {

std::vector<double> dispersion(int n, double length) {
    const double h = length / (n - 1);
    std::vector<double> eta(n);
    for (int m = 0; m < n; ++m) {
        const double s = std::sin(std::numbers::pi * m * h / (2.0 * length));
        eta[m] = 4.0 / (h * h) * s * s;
    }
    std::sort(eta.begin(), eta.end());
    return eta;
}

std::vector<double> hessian_spectrum(double z_bar, const ModelParams& p, int n, double length) {
    const double gp = g_prime(z_bar, p);
    std::vector<double> out;
    const auto eta = dispersion(n, length);
    for (std::size_t l = 0; l < eta.size(); ++l) {
        double e = p.D * eta[l] - gp;
        if (l == 0) e += p.k * p.xi;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::pair<Complex, Complex> mode_pair(double eta, double z_bar, const ModelParams& p) {
    const double m11 = 1.0 + p.D * p.xi / p.alpha, m12 = -p.xi / p.alpha, m21 = p.xi, m22 = 1.0;
    const double det_m = m11 * m22 - m12 * m21;
    const double i11 = m22 / det_m, i12 = -m12 / det_m, i21 = -m21 / det_m, i22 = m11 / det_m;
    const double a11 = p.D * eta - g_prime(z_bar, p), a12 = -p.k, a21 = 0.0, a22 = p.alpha * eta;
    const double b11 = i11 * a11 + i12 * a21;
    const double b12 = i11 * a12 + i12 * a22;
    const double b21 = i21 * a11 + i22 * a21;
    const double b22 = i21 * a12 + i22 * a22;
    const double half_trace = 0.5 * (b11 + b22);
    const double det = b11 * b22 - b12 * b21;
    const Complex root = std::sqrt(Complex(half_trace * half_trace - det, 0.0));
    return {half_trace - root, half_trace + root};
}

std::vector<Complex> linearization_spectrum(double z_bar, const ModelParams& p, int n, double length,
                                            bool restricted) {
    std::vector<Complex> out;
    const auto eta = dispersion(n, length);
    for (std::size_t l = 0; l < eta.size(); ++l) {
        const auto [a, b] = mode_pair(eta[l], z_bar, p);
        if (l == 0 && restricted) {
            out.push_back(std::abs(a) < std::abs(b) ? b : a);
        } else {
            out.push_back(a);
            out.push_back(b);
        }
    }
    std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return out;
}

std::vector<double> mu_spectrum(double z_bar, const ModelParams& p, int n, double length, double s) {
    const double gp = g_prime(z_bar, p);
    const auto eta = dispersion(n, length);
    std::vector<double> out;
    out.push_back((p.k * p.xi - gp) / (1.0 + p.xi * (p.D + p.xi) / p.alpha));
    for (std::size_t l = 1; l < eta.size(); ++l) {
        const double weight = 1.0 + p.D * p.xi / p.alpha + (p.xi / p.alpha) * (p.k + s * p.xi) / (eta[l] + s);
        out.push_back((p.D * eta[l] - gp) / weight);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mcrd::app::oracle
