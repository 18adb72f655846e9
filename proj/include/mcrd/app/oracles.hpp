#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "mcrd/model.hpp"

// Closed-form spectra of homogeneous states on a 1D interval, computed mode by
// mode without assembling any matrix. Used only to check the assembled
// operators.

namespace mcrd::app::oracle {

using Complex = std::complex<double>;

/// (4 / h^2) sin^2(pi m h / (2 L)), m = 0..n-1, ascending.
std::vector<double> dispersion(int n, double length);

/// Hessian eigenvalues at a constant z_bar: D eta - g'(z_bar), plus k xi on
/// the constant mode. Ascending.
std::vector<double> hessian_spectrum(double z_bar, const ModelParams& p, int n, double length);

/// Eigenvalues of [[1 + D xi/alpha, -xi/alpha], [xi, 1]]^{-1} [[D eta - g', -k], [0, alpha eta]]
/// for one mode (quadratic formula).
std::pair<Complex, Complex> mode_pair(double eta, double z_bar, const ModelParams& p);

/// Union of mode_pair over every discrete mode. With `restricted`, the zero
/// contributed by the constant mode is dropped. Sorted by (real, imag).
std::vector<Complex> linearization_spectrum(double z_bar, const ModelParams& p, int n, double length,
                                            bool restricted);

/// mu_j(s) at a constant z_bar, ascending.
std::vector<double> mu_spectrum(double z_bar, const ModelParams& p, int n, double length, double s);

}  // namespace mcrd::app::oracle
