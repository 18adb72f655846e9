#include "mcrd/stationary.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"

namespace mcrd {

namespace {

double homogeneous_residual(double z, const ModelParams& p, double lambda, double volume) {
    return g(z, p) + p.k * (lambda / volume - p.xi * z);
}

[[noreturn]] void throw_singular(const Eigen::MatrixXd& jac, const char* who) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    std::ostringstream msg;
    msg << who << ": singular Jacobian (smallest singular value "
        << svd.singularValues()[svd.singularValues().size() - 1] << ")";
    throw SolverError(msg.str());
}

// Solves the dense system and reports singularity with the smallest singular value.
Eigen::VectorXd dense_solve(const Eigen::MatrixXd& jac, const Eigen::VectorXd& rhs, const char* who) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > 1e-14)) throw_singular(jac, who);
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) throw_singular(jac, who);
    return x;
}

// Newton correction for the nonlocal stationary problem:
//   (D Lap_h + diag g'(z) - c 1 w^T) delta = -F,   c = k xi / |Omega|.
Eigen::VectorXd newton_direction(const Field& z, const Eigen::VectorXd& residual, const ModelParams& p,
                                 const NewtonOptions& options) {
    const Grid& grid = z.grid();
    const double c = p.k * p.xi / grid.volume();
    const Eigen::VectorXd gp = g_prime_field(z, p).values();
    const Eigen::VectorXd& w = grid.weights();
    const int n = grid.nodes();
    if (n <= options.dense_limit) {
        Eigen::MatrixXd jac = p.D * grid.laplacian_matrix();
        jac.diagonal() += gp;
        jac.noalias() -= c * Eigen::VectorXd::Ones(n) * w.transpose();
        return dense_solve(jac, -residual, "newton_solve");
    }
    // Sparse local part, rank-one nonlocal part by Sherman-Morrison.
    Eigen::SparseMatrix<double> a = p.D * grid.laplacian_sparse();
    for (int i = 0; i < n; ++i) a.coeffRef(i, i) += gp[i];
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("newton_solve: sparse factorization failed");
    const Eigen::VectorXd y = lu.solve(-residual);
    const Eigen::VectorXd q = lu.solve(Eigen::VectorXd::Ones(n));
    const double denom = 1.0 - c * w.dot(q);
    if (!(std::abs(denom) > 1e-14)) throw SolverError("newton_solve: singular rank-one update");
    Eigen::VectorXd x = y + q * (c * w.dot(y) / denom);
    if (!x.allFinite()) throw SolverError("newton_solve: non-finite Newton step");
    return x;
}

}  // namespace

std::vector<double> homogeneous_roots(const ModelParams& p, double lambda, double volume,
                                      std::optional<double> z_max) {
    if (!std::isfinite(lambda)) throw ConfigError("homogeneous_roots: lambda must be finite");
    // g(z) <= -k D z, so the residual is negative beyond lambda / (|Omega| (xi + D)).
    const double hi = z_max.value_or(std::max(1.0, lambda / (volume * (p.xi + p.D))));
    constexpr int kScan = 4000;
    auto phi = [&](double z) { return homogeneous_residual(z, p, lambda, volume); };

    std::vector<double> roots;
    double a = 0.0;
    double fa = phi(a);
    if (fa == 0.0) roots.push_back(a);
    for (int i = 1; i <= kScan; ++i) {
        const double b = hi * i / kScan;
        const double fb = phi(b);
        if (fb == 0.0) {
            roots.push_back(b);
        } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
            double lo = a;
            double up = b;
            double flo = fa;
            while (up - lo > 1e-15 * std::max(1.0, up)) {
                const double mid = 0.5 * (lo + up);
                const double fm = phi(mid);
                if (fm == 0.0) {
                    lo = up = mid;
                    break;
                }
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    up = mid;
                }
            }
            const double r = std::abs(phi(lo)) <= std::abs(phi(up)) ? lo : up;
            roots.push_back(r);
        }
        a = b;
        fa = fb;
    }
    return roots;
}

double lambda_for_homogeneous(const ModelParams& p, double z_bar, double volume) {
    return volume * (p.xi * z_bar - g(z_bar, p) / p.k);
}

Field stationary_residual(const Field& z, const ModelParams& p, double lambda) {
    Field f = j_gradient(z, p, lambda);
    f *= -1.0;
    return f;
}

StationaryState newton_solve(const Field& z_init, const ModelParams& p, double lambda,
                             const NewtonOptions& options) {
    if (!(options.tol > 0.0)) throw ConfigError("newton_solve: tol must be positive");
    const Grid& grid = z_init.grid();
    Field z = z_init;
    Field f = stationary_residual(z, p, lambda);
    double norm = grid.norm(f);

    StationaryState out{z, 0.0, lambda, norm, 0.0, 0, {}, std::nullopt};
    int it = 0;
    for (;; ++it) {
        out.residual_history.push_back(norm);
        if (!std::isfinite(norm)) throw SolverError("newton_solve: residual became non-finite");
        if (norm < options.tol) break;
        if (it >= options.max_iter) {
            std::ostringstream msg;
            msg << "newton_solve: no convergence in " << options.max_iter << " iterations (residual " << norm
                << ")";
            throw SolverError(msg.str());
        }
        const Eigen::VectorXd step = newton_direction(z, f.values(), p, options);
        double t = 1.0;
        Field trial(z.grid_ptr(), z.values() + step);
        Field f_trial = stationary_residual(trial, p, lambda);
        double n_trial = grid.norm(f_trial);
        if (options.damped) {
            while (!(n_trial <= (1.0 - 1e-4 * t) * norm) && t > 1.0 / 1024.0) {
                t *= 0.5;
                trial.values() = z.values() + t * step;
                f_trial = stationary_residual(trial, p, lambda);
                n_trial = grid.norm(f_trial);
            }
        }
        z = std::move(trial);
        f = std::move(f_trial);
        norm = n_trial;
    }
    out.z_star = z;
    out.iterations = it;
    out.residual_norm = norm;
    out.w_bar = w_bar(z, p, lambda);
    out.j_value = j_functional(z, p, lambda).total;
    return out;
}

Field relax_gradient_flow(const Field& z_init, const ModelParams& p, double lambda, double dt, double tol,
                          int max_steps) {
    if (!(dt > 0.0)) throw ConfigError("relax_gradient_flow: dt must be positive");
    const Grid& grid = z_init.grid();
    const ShiftedLaplacianSolver solver(z_init.grid_ptr(), 1.0, dt * p.D);
    Field z = z_init;
    for (int step = 0; step < max_steps; ++step) {
        const double nonlocal = p.k / grid.volume() * (lambda - p.xi * grid.integral(z));
        Field rhs = z + dt * g_field(z, p);
        rhs.values().array() += dt * nonlocal;
        Field next = solver.solve_conservative(rhs);
        const double rate = grid.norm(next - z) / dt;
        z = std::move(next);
        if (!std::isfinite(rate)) throw SolverError("relax_gradient_flow: diverged");
        if (rate < tol) break;
    }
    return z;
}

std::pair<Field, Field> reconstruct_uv(const StationaryState& s, const ModelParams& p) {
    if (p.D == 1.0) throw ConfigError("reconstruct_uv: D == 1 makes the transform singular");
    return from_zw(s.z_star, Field::constant(s.z_star.grid_ptr(), s.w_bar), p);
}

Field cosine_guess(const GridPtr& grid, double z_bar, double amplitude) {
    const double length = grid->length(0);
    return Field::sample(grid, [&](double x, double) {
        return z_bar + amplitude * std::cos(std::numbers::pi * x / length);
    });
}

LimitSolution limit_tau1_solve(const Field& z_init, const Kinetics& kin, double lambda_hat,
                               const NewtonOptions& options) {
    if (!std::isfinite(lambda_hat)) throw ConfigError("limit_tau1_solve: lambda_hat must be finite");
    if (!(options.tol > 0.0)) throw ConfigError("limit_tau1_solve: tol must be positive");
    const Grid& grid = z_init.grid();
    const int n = grid.nodes();
    const double vol = grid.volume();
    const Eigen::VectorXd& w = grid.weights();

    Field z = z_init;
    z.values().array() += (lambda_hat - grid.integral(z)) / vol;
    double mu = -grid.integral(g_field(z, kin)) / vol;

    auto residual = [&](const Field& zz, double m) {
        Field r = grid.laplacian(zz);
        r *= kin.D;
        r += g_field(zz, kin);
        r.values().array() += m;
        return r;
    };
    auto merit = [&](const Field& r, double c) { return std::hypot(grid.norm(r), c); };

    Field r = residual(z, mu);
    double c = grid.integral(z) - lambda_hat;
    double norm = merit(r, c);
    int it = 0;
    for (;; ++it) {
        if (!std::isfinite(norm)) throw SolverError("limit_tau1_solve: residual became non-finite");
        if (grid.norm(r) < options.tol && std::abs(c) <= 1e-12 * std::max(1.0, std::abs(lambda_hat))) break;
        if (it >= options.max_iter) {
            std::ostringstream msg;
            msg << "limit_tau1_solve: no convergence in " << options.max_iter << " iterations (residual "
                << norm << ")";
            throw SolverError(msg.str());
        }
        const Eigen::VectorXd gp = g_prime_field(z, kin).values();
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = -r.values();
        rhs[n] = -c;
        Eigen::VectorXd step;
        if (n + 1 <= options.dense_limit) {
            Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 1, n + 1);
            jac.topLeftCorner(n, n) = kin.D * grid.laplacian_matrix();
            jac.topLeftCorner(n, n).diagonal() += gp;
            jac.col(n).head(n).setOnes();
            jac.row(n).head(n) = w.transpose();
            step = dense_solve(jac, rhs, "limit_tau1_solve");
        } else {
            Eigen::SparseMatrix<double> lap = kin.D * grid.laplacian_sparse();
            std::vector<Eigen::Triplet<double>> t;
            for (int k = 0; k < lap.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator itr(lap, k); itr; ++itr)
                    t.emplace_back(itr.row(), itr.col(), itr.value());
            for (int i = 0; i < n; ++i) {
                t.emplace_back(i, i, gp[i]);
                t.emplace_back(i, n, 1.0);
                t.emplace_back(n, i, w[i]);
            }
            Eigen::SparseMatrix<double> jac(n + 1, n + 1);
            jac.setFromTriplets(t.begin(), t.end());
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(jac);
            if (lu.info() != Eigen::Success) throw SolverError("limit_tau1_solve: sparse factorization failed");
            step = lu.solve(rhs);
        }
        double t = 1.0;
        Field trial(z.grid_ptr(), z.values() + step.head(n));
        double mu_trial = mu + step[n];
        Field r_trial = residual(trial, mu_trial);
        double c_trial = grid.integral(trial) - lambda_hat;
        double n_trial = merit(r_trial, c_trial);
        if (options.damped) {
            while (!(n_trial <= (1.0 - 1e-4 * t) * norm) && t > 1.0 / 1024.0) {
                t *= 0.5;
                trial.values() = z.values() + t * step.head(n);
                mu_trial = mu + t * step[n];
                r_trial = residual(trial, mu_trial);
                c_trial = grid.integral(trial) - lambda_hat;
                n_trial = merit(r_trial, c_trial);
            }
        }
        z = std::move(trial);
        mu = mu_trial;
        r = std::move(r_trial);
        c = c_trial;
        norm = n_trial;
    }

    LimitSolution out{z, mu, lambda_hat, grid.norm(r), 0.0, 0.0, 0.0, it};
    out.constraint_error = std::abs(grid.integral(z) - lambda_hat);
    out.multiplier_error = std::abs(mu + grid.integral(g_field(z, kin)) / vol);
    out.j_hat = 0.5 * kin.D * grid.grad_norm_sq(z) - grid.integral(G_field(z, kin));
    return out;
}

Field relax_limit_flow(const Field& z_init, const Kinetics& kin, double dt, double tol, int max_steps) {
    if (!(dt > 0.0)) throw ConfigError("relax_limit_flow: dt must be positive");
    const Grid& grid = z_init.grid();
    const ShiftedLaplacianSolver solver(z_init.grid_ptr(), 1.0, dt * kin.D);
    Field z = z_init;
    for (int step = 0; step < max_steps; ++step) {
        Field rhs = grid.project_zero_mean(g_field(z, kin));
        rhs *= dt;
        rhs += z;
        Field next = solver.solve_conservative(rhs);
        const double rate = grid.norm(next - z) / dt;
        z = std::move(next);
        if (!std::isfinite(rate)) throw SolverError("relax_limit_flow: diverged");
        if (rate < tol) break;
    }
    return z;
}

}  // namespace mcrd
