#include "mcrd/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "mcrd/errors.hpp"

namespace mcrd {

namespace {

// S Lap_h S^{-1} with S = diag(sqrt w).
Eigen::MatrixXd scaled_laplacian(const Grid& grid) {
    const Eigen::VectorXd& s = grid.sqrt_weights();
    Eigen::MatrixXd lap = s.asDiagonal() * grid.laplacian_matrix() * s.cwiseInverse().asDiagonal();
    return 0.5 * (lap + lap.transpose());
}

// 2x2 symbol of M.
struct MassSymbol {
    double a, b, c, d;
};

MassSymbol mass_symbol(const ModelParams& p) {
    return {1.0 + p.D * p.xi / p.alpha, -p.xi / p.alpha, p.xi, 1.0};
}

}  // namespace

SelfAdjointOperator build_L(const Field& z_star, const ModelParams& p) {
    const Grid& grid = z_star.grid();
    const int n = grid.nodes();
    const Eigen::VectorXd gp = g_prime_field(z_star, p).values();
    const double nonlocal = p.k * p.xi / grid.volume();

    SelfAdjointOperator op;
    op.nodal = -p.D * grid.laplacian_matrix();
    op.nodal.diagonal() -= gp;
    op.nodal += nonlocal * Eigen::VectorXd::Ones(n) * grid.weights().transpose();

    const Eigen::VectorXd& s = grid.sqrt_weights();
    op.symmetric = -p.D * scaled_laplacian(grid);
    op.symmetric.diagonal() -= gp;
    op.symmetric += nonlocal * s * s.transpose();
    op.symmetric = 0.5 * (op.symmetric + op.symmetric.transpose()).eval();
    return op;
}

LinearizedPencil build_pencil(const Field& z_star, const ModelParams& p) {
    const Grid& grid = z_star.grid();
    const int n = grid.nodes();
    const Eigen::MatrixXd lap = scaled_laplacian(grid);
    const Eigen::VectorXd gp = g_prime_field(z_star, p).values();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    LinearizedPencil pencil;
    pencil.A1 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    pencil.A1.topLeftCorner(n, n) = -p.D * lap;
    pencil.A1.topLeftCorner(n, n).diagonal() -= gp;
    pencil.A1.topRightCorner(n, n) = -p.k * eye;
    pencil.A1.bottomRightCorner(n, n) = -p.alpha * lap;

    const MassSymbol m = mass_symbol(p);
    pencil.M.resize(2 * n, 2 * n);
    pencil.M << m.a * eye, m.b * eye, m.c * eye, m.d * eye;

    pencil.constraint.resize(2 * n);
    pencil.constraint << p.xi * grid.sqrt_weights(), grid.sqrt_weights();
    return pencil;
}

ConstrainedOperator build_A(const Field& z_star, const ModelParams& p) {
    const Grid& grid = z_star.grid();
    const int n = grid.nodes();
    const LinearizedPencil pencil = build_pencil(z_star, p);

    const MassSymbol m = mass_symbol(p);
    Eigen::Matrix2d sym;
    sym << m.a, m.b, m.c, m.d;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(sym);
    const double smin = svd.singularValues()(1);
    ConstrainedOperator op;
    op.m_condition = smin > 0.0 ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
    if (!std::isfinite(op.m_condition) || op.m_condition > 1e12) {
        std::ostringstream msg;
        msg << "mass matrix is numerically singular (condition number " << op.m_condition << ")";
        throw SolverError(msg.str());
    }
    const Eigen::Matrix2d inv = sym.inverse();

    op.full.resize(2 * n, 2 * n);
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            op.full.block(bi * n, bj * n, n, n) = inv(bi, 0) * pencil.A1.block(0, bj * n, n, n) +
                                                   inv(bi, 1) * pencil.A1.block(n, bj * n, n, n);

    const Eigen::VectorXd c = pencil.constraint.normalized();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n, 2 * n);
    op.basis = q.rightCols(2 * n - 1);
    op.restricted = op.basis.transpose() * op.full * op.basis;
    return op;
}

std::vector<Complex> general_eigenvalues(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw SolverError("nonsymmetric eigensolver did not converge");
    std::vector<Complex> out(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return out;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a) {
    using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<MatrixXld> es(a.cast<long double>(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge");
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(static_cast<double>(es.eigenvalues()[i]));
    return out;
}

double weighted_norm_multiplier(double eta, double s, const ModelParams& p) {
    return 1.0 + p.D * p.xi / p.alpha + (p.xi / p.alpha) * (p.k + s * p.xi) / (eta + s);
}

double weighted_norm_constant(const ModelParams& p) { return 1.0 + p.xi * (p.D + p.xi) / p.alpha; }

namespace {

void require_admissible(double s, double eta2) {
    if (!(s > -eta2) || !std::isfinite(s)) {
        std::ostringstream msg;
        msg << "weighted norm needs s > -eta2 = " << -eta2 << ", got s = " << s;
        throw ConfigError(msg.str());
    }
}

Eigen::VectorXd mode_weights(double s, const ModelParams& p, const std::vector<double>& eta) {
    require_admissible(s, eta.size() > 1 ? eta[1] : 0.0);
    Eigen::VectorXd m(eta.size());
    m[0] = weighted_norm_constant(p);
    for (std::size_t l = 1; l < eta.size(); ++l) m[l] = weighted_norm_multiplier(eta[l], s, p);
    return m;
}

}  // namespace

Eigen::MatrixXd weighted_norm_matrix(double s, const ModelParams& p, const Grid& grid) {
    const Eigen::VectorXd m = mode_weights(s, p, grid.neumann_eigenvalues());
    const Eigen::MatrixXd psi = grid.sqrt_weights().asDiagonal() * grid.eigenvector_matrix();
    Eigen::MatrixXd out = psi * m.asDiagonal() * psi.transpose();
    return 0.5 * (out + out.transpose());
}

Field apply_weighted_norm(double s, const ModelParams& p, const Field& phi) {
    const Grid& grid = phi.grid();
    const Eigen::VectorXd m = mode_weights(s, p, grid.neumann_eigenvalues());
    const Eigen::MatrixXd phi_mat = grid.eigenvector_matrix();
    const Eigen::VectorXd coeff = phi_mat.transpose() * grid.weights().cwiseProduct(phi.values());
    return Field(phi.grid_ptr(), phi_mat * m.cwiseProduct(coeff));
}

double rayleigh_quotient(const Field& phi, const Field& z_star, const ModelParams& p, double s) {
    const Grid& grid = phi.grid();
    const Field gp = g_prime_field(z_star, p);
    Field gphi = phi;
    gphi.values().array() *= gp.values().array();
    const double mean = grid.mean(phi);
    const double num = p.D * grid.grad_norm_sq(phi) - grid.inner(gphi, phi) + p.k * p.xi * grid.volume() * mean * mean;
    const double den = grid.inner(apply_weighted_norm(s, p, phi), phi);
    return num / den;
}

MuSolver::MuSolver(const Field& z_star, const ModelParams& p)
    : z_(z_star),
      p_(p),
      l_sym_(build_L(z_star, p).symmetric),
      psi_(z_star.grid().sqrt_weights().asDiagonal() * z_star.grid().eigenvector_matrix()),
      eta_(z_star.grid().neumann_eigenvalues()) {}

Eigen::MatrixXd MuSolver::inverse_sqrt_m(double s) const {
    const Eigen::VectorXd m = mode_weights(s, p_, eta_);
    if (m.minCoeff() <= 0.0) {
        std::ostringstream msg;
        msg << "M(s) is not positive definite at s = " << s << " (smallest mode weight " << m.minCoeff() << ")";
        throw SolverError(msg.str());
    }
    return psi_ * m.cwiseSqrt().cwiseInverse().asDiagonal() * psi_.transpose();
}

std::vector<double> MuSolver::eigenvalues(double s) const {
    const Eigen::MatrixXd r = inverse_sqrt_m(s);
    Eigen::MatrixXd c = r * l_sym_ * r;
    c = 0.5 * (c + c.transpose()).eval();
    return symmetric_eigenvalues(c);
}

MuSolver::Pairs MuSolver::eigenpairs(double s, int count) const {
    const int n = static_cast<int>(eta_.size());
    if (count < 1 || count > n) throw ConfigError("eigenpair count must be in [1, nodes]");
    const Eigen::MatrixXd r = inverse_sqrt_m(s);
    Eigen::MatrixXd c = r * l_sym_ * r;
    c = 0.5 * (c + c.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge");

    const Grid& grid = z_.grid();
    const Eigen::VectorXd inv_sqrt_w = grid.sqrt_weights().cwiseInverse();
    Pairs out;
    for (int j = 0; j < count; ++j) {
        out.mu.push_back(es.eigenvalues()[j]);
        const Eigen::VectorXd y = r * es.eigenvectors().col(j);
        out.modes.emplace_back(z_.grid_ptr(), inv_sqrt_w.cwiseProduct(y));
    }
    return out;
}

std::vector<double> MuCurve::curve(int j) const {
    std::vector<double> out;
    for (const auto& s : samples)
        if (s.j == j) out.push_back(s.mu);
    return out;
}

MuCurve mu_curve(const Field& z_star, const ModelParams& p, const std::vector<double>& s_grid, int j_max) {
    const MuSolver solver(z_star, p);
    MuCurve out;
    out.j_max = j_max;
    for (double s : s_grid) {
        const auto pairs = solver.eigenpairs(s, j_max);
        for (int j = 0; j < j_max; ++j) {
            const double r = rayleigh_quotient(pairs.modes[j], z_star, p, s);
            out.samples.push_back({s, j + 1, pairs.mu[j], r});
            out.max_rayleigh_error =
                std::max(out.max_rayleigh_error, std::abs(r - pairs.mu[j]) / std::max(1.0, std::abs(pairs.mu[j])));
        }
    }
    return out;
}

std::vector<double> negative_eigs_by_fixed_point(const Field& z_star, const ModelParams& p) {
    const std::vector<double> eigs_l = symmetric_eigenvalues(build_L(z_star, p).symmetric);
    double scale = 0.0;
    for (double e : eigs_l) scale = std::max(scale, std::abs(e));
    const double zero_tol = 1e-8 * scale;
    const int m = static_cast<int>(std::count_if(eigs_l.begin(), eigs_l.end(), [&](double e) { return e < -zero_tol; }));

    const MuSolver solver(z_star, p);
    std::vector<double> sigmas;
    for (int j = 0; j < m; ++j) {
        auto f = [&](double s) { return solver.eigenvalues(s)[j] / s + p.alpha; };
        auto bracket_failure = [&](const char* side, double s) {
            std::ostringstream msg;
            msg << "fixed-point bracket failure for j = " << j + 1 << " (" << side << " end): mu(" << s
                << ")/s + alpha = " << f(s);
            return SolverError(msg.str());
        };
        double lo = 1.0;
        while (f(lo) >= 0.0) {
            lo *= 0.5;
            if (lo < 1e-14) throw bracket_failure("lower", lo);
        }
        double hi = 1.0;
        while (f(hi) <= 0.0) {
            hi *= 2.0;
            if (hi > 1e14) throw bracket_failure("upper", hi);
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        sigmas.push_back(-p.alpha * 0.5 * (lo + hi));
    }
    std::sort(sigmas.begin(), sigmas.end());
    return sigmas;
}

namespace {

double max_abs(const std::vector<Complex>& v) {
    double out = 0.0;
    for (const auto& x : v) out = std::max(out, std::abs(x));
    return out;
}

bool near_threshold(double magnitude, double zero_tol) {
    return magnitude > 0.1 * zero_tol && magnitude <= 10.0 * zero_tol;
}

// Clusters of nearly equal eigenvalues whose geometric multiplicity (SVD
// nullity of A - sigma I) falls short of the cluster size.
int count_defective(const Eigen::MatrixXd& a, const std::vector<Complex>& eigs, double re_limit) {
    const double norm = a.norm();
    int defective = 0;
    std::size_t i = 0;
    while (i < eigs.size()) {
        std::size_t j = i + 1;
        while (j < eigs.size() && std::abs(eigs[j] - eigs[i]) <= 1e-6 * std::max(1.0, std::abs(eigs[i]))) ++j;
        const std::size_t size = j - i;
        if (size >= 2 && eigs[i].real() < re_limit && std::abs(eigs[i].imag()) < 1e-8) {
            Complex mean = 0.0;
            for (std::size_t q = i; q < j; ++q) mean += eigs[q];
            mean /= static_cast<double>(size);
            Eigen::MatrixXd shifted = a;
            shifted.diagonal().array() -= mean.real();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(shifted);
            const auto& sv = svd.singularValues();
            const long nullity = (sv.array() < 1e-6 * norm).count();
            if (static_cast<std::size_t>(nullity) < size) ++defective;
        }
        i = j;
    }
    return defective;
}

}  // namespace

SpectrumReport spectrum_counts(const Field& z_star, const ModelParams& p, double tol) {
    const Grid& grid = z_star.grid();
    SpectrumReport rep;
    rep.eigs_L = symmetric_eigenvalues(build_L(z_star, p).symmetric);
    const ConstrainedOperator a = build_A(z_star, p);
    rep.eigs_A = general_eigenvalues(a.restricted);
    rep.eigs_A_full = general_eigenvalues(a.full);

    double scale_l = 0.0;
    for (double e : rep.eigs_L) scale_l = std::max(scale_l, std::abs(e));
    rep.zero_tol_L = tol * scale_l;
    rep.zero_tol_A = tol * max_abs(rep.eigs_A);

    for (double e : rep.eigs_L) {
        if (e < -rep.zero_tol_L) ++rep.morse_L;
        if (std::abs(e) <= rep.zero_tol_L) ++rep.zero_L;
        if (near_threshold(std::abs(e), rep.zero_tol_L)) rep.ambiguous.emplace_back(e, 0.0);
    }
    for (const auto& e : rep.eigs_A) {
        if (e.real() < -rep.zero_tol_A) ++rep.morse_A;
        if (std::abs(e) <= rep.zero_tol_A) ++rep.zero_A;
        if (near_threshold(std::abs(e), rep.zero_tol_A)) rep.ambiguous.push_back(e);
    }

    rep.realness_threshold = p.alpha * p.k / (2.0 * p.xi);
    rep.stated_threshold = p.k / (2.0 * p.xi);
    for (const auto& e : rep.eigs_A) {
        if (std::abs(e.imag()) <= tol) continue;
        if (e.real() < rep.realness_threshold) rep.realness_violations.push_back(e);
        if (e.real() < rep.stated_threshold) rep.stated_threshold_violations.push_back(e);
    }
    rep.defective_clusters = count_defective(a.restricted, rep.eigs_A, rep.realness_threshold);

    rep.xi_eta2 = p.xi * grid.eta2();
    rep.hypothesis_holds = rep.xi_eta2 > p.k;
    rep.morse_equal = rep.morse_A == rep.morse_L;
    rep.zero_equal = rep.zero_A == rep.zero_L;
    rep.realness_ok = rep.realness_violations.empty() && rep.defective_clusters == 0;
    rep.comparison_ok = !rep.hypothesis_holds || (rep.morse_equal && rep.zero_equal);
    return rep;
}

SpectrumReport spectral_report(const Field& z_star, const ModelParams& p, double tol) {
    const Grid& grid = z_star.grid();
    SpectrumReport rep = spectrum_counts(z_star, p, tol);
    const int j_max = std::min(4, grid.nodes());
    rep.mu_samples = mu_curve(z_star, p, {0.1, 1.0, 10.0}, j_max).samples;
    if (rep.hypothesis_holds) rep.fixed_point_sigmas = negative_eigs_by_fixed_point(z_star, p);
    return rep;
}

}  // namespace mcrd
