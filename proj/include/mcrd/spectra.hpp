#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"
#include "mcrd/stationary.hpp"

// Linearized stability around a stationary state z*.
//
// Matrices are assembled in "scaled" coordinates y = W^{1/2} x, where W holds
// the quadrature weights. In these coordinates the weighted L2 inner product
// is the Euclidean one, the discrete Neumann Laplacian is a symmetric matrix,
// and every self-adjoint operator below becomes a symmetric matrix. Spectra
// are unchanged by the similarity.

namespace mcrd {

using Complex = std::complex<double>;

/// The Hessian of J_lambda at z*:
///   L phi = -(D Lap_h phi + g'(z*) phi - (k xi / |Omega|) int phi).
struct SelfAdjointOperator {
    Eigen::MatrixXd nodal;      ///< acts on nodal values
    Eigen::MatrixXd symmetric;  ///< W^{1/2} nodal W^{-1/2}, explicitly symmetrized
};

SelfAdjointOperator build_L(const Field& z_star, const ModelParams& p);

/// d/dt M (Z, W) + A1 (Z, W) = 0 in scaled coordinates, with
///   M  = [[1 + D xi/alpha, -xi/alpha], [xi, 1]]  (x) I
///   A1 = [[-D Lap - g'(z*), -k], [0, -alpha Lap]]
/// and the conserved functional int (W + xi Z) = constraint . (Z, W).
struct LinearizedPencil {
    Eigen::MatrixXd A1;
    Eigen::MatrixXd M;
    Eigen::VectorXd constraint;
};

LinearizedPencil build_pencil(const Field& z_star, const ModelParams& p);

/// A = M^{-1} A1 on the full 2N space and restricted to the invariant
/// subspace {int (W + xi Z) = 0} through an orthonormal basis of the
/// constraint's orthogonal complement.
struct ConstrainedOperator {
    Eigen::MatrixXd full;
    Eigen::MatrixXd restricted;
    Eigen::MatrixXd basis;       ///< 2N x (2N - 1), orthonormal columns
    double m_condition = 0.0;    ///< 2-norm condition number of M
};

ConstrainedOperator build_A(const Field& z_star, const ModelParams& p);

/// Eigenvalues of a general real matrix, sorted by (real part, imaginary part).
std::vector<Complex> general_eigenvalues(const Eigen::MatrixXd& a);
/// Eigenvalues of a symmetric matrix, ascending, computed in long double.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a);

/// Weight of M(s) on a Neumann mode with eigenvalue eta > 0:
///   (1 + D xi/alpha) + (xi/alpha)(k + s xi)/(eta + s)
double weighted_norm_multiplier(double eta, double s, const ModelParams& p);
/// Weight of M(s) on constants: 1 + xi (D + xi)/alpha.
double weighted_norm_constant(const ModelParams& p);

/// M(s) = c0 (1 - Q) + {(1 + D xi/alpha) + (xi/alpha)(k + s xi)(-Lap_N + s)^{-1}} Q,
/// assembled from the discrete Neumann eigenbasis (scaled coordinates).
/// Throws ConfigError for s <= -eta2.
Eigen::MatrixXd weighted_norm_matrix(double s, const ModelParams& p, const Grid& grid);

/// Nodal action of M(s) on a field.
Field apply_weighted_norm(double s, const ModelParams& p, const Field& phi);

/// R(phi, s) = (D ||grad phi||^2 - (g'(z*) phi, phi) + k xi |Omega| <phi>^2) / (M(s) phi, phi).
double rayleigh_quotient(const Field& phi, const Field& z_star, const ModelParams& p, double s);

/// Generalized eigenvalues of L phi = mu M(s) phi.
class MuSolver {
public:
    MuSolver(const Field& z_star, const ModelParams& p);

    /// Ascending eigenvalues mu_1(s) <= mu_2(s) <= ...; throws SolverError
    /// when M(s) is not positive definite, ConfigError when s <= -eta2.
    std::vector<double> eigenvalues(double s) const;

    struct Pairs {
        std::vector<double> mu;
        std::vector<Field> modes;  ///< nodal eigenfunctions, (M(s) phi, phi) = 1
    };
    Pairs eigenpairs(double s, int count) const;

    const ModelParams& params() const { return p_; }
    const Field& z_star() const { return z_; }

private:
    Eigen::MatrixXd inverse_sqrt_m(double s) const;

    Field z_;
    ModelParams p_;
    Eigen::MatrixXd l_sym_;
    Eigen::MatrixXd psi_;  ///< scaled eigenvectors of -Lap_h (orthonormal columns)
    std::vector<double> eta_;
};

struct MuSample {
    double s;
    int j;              ///< 1-based index in ascending order
    double mu;
    double rayleigh;    ///< R(phi_j(s), s)
};

struct MuCurve {
    std::vector<MuSample> samples;
    double max_rayleigh_error = 0.0;  ///< max |R - mu| / max(1, |mu|)
    int j_max = 0;

    /// mu_j over the s grid, in s order.
    std::vector<double> curve(int j) const;
};

MuCurve mu_curve(const Field& z_star, const ModelParams& p, const std::vector<double>& s_grid, int j_max);

/// Negative eigenvalues of A recovered from mu_j(s)/s = -alpha, s > 0,
/// sigma = -alpha s, for j = 1..m with m the negative count of L. Ascending.
/// Throws SolverError if a bracket cannot be found.
std::vector<double> negative_eigs_by_fixed_point(const Field& z_star, const ModelParams& p);

struct SpectrumReport {
    std::vector<Complex> eigs_A;       ///< restricted operator
    std::vector<Complex> eigs_A_full;  ///< full 2N space (one extra zero)
    std::vector<double> eigs_L;
    int morse_A = 0;
    int morse_L = 0;
    int zero_A = 0;
    int zero_L = 0;
    double zero_tol_A = 0.0;
    double zero_tol_L = 0.0;
    std::vector<Complex> ambiguous;    ///< within a decade of a zero threshold

    double realness_threshold = 0.0;   ///< alpha k / (2 xi), asserted
    double stated_threshold = 0.0;     ///< k / (2 xi), reported only
    std::vector<Complex> realness_violations;         ///< Re < alpha k/(2 xi) and |Im| > tol
    std::vector<Complex> stated_threshold_violations; ///< same test with k/(2 xi)
    int defective_clusters = 0;        ///< eigenvalue clusters with geometric < algebraic multiplicity

    double xi_eta2 = 0.0;
    bool hypothesis_holds = false;     ///< xi eta2 > k
    bool morse_equal = false;
    bool zero_equal = false;
    /// Asserted checks: realness always, index equality only when xi eta2 > k.
    bool realness_ok = false;
    bool comparison_ok = false;        ///< true when not applicable

    std::vector<MuSample> mu_samples;
    std::vector<double> fixed_point_sigmas;
};

/// Builds both operators at z*, classifies their spectra and checks the
/// realness region and (when xi eta2 > k) the index equalities.
/// Leaves mu_samples and fixed_point_sigmas empty.
SpectrumReport spectrum_counts(const Field& z_star, const ModelParams& p, double tol = 1e-8);

/// spectrum_counts plus mu_j(s) samples at s = 0.1, 1, 10 and, under the
/// hypothesis, the fixed-point recovery of the negative eigenvalues.
SpectrumReport spectral_report(const Field& z_star, const ModelParams& p, double tol = 1e-8);

}  // namespace mcrd
