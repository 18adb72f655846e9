#include "mcrd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mcrd/errors.hpp"

namespace mcrd {

// ---------------------------------------------------------------- Field

Field::Field(GridPtr grid) : grid_(std::move(grid)), values_(Eigen::VectorXd::Zero(grid_->nodes())) {}

Field::Field(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->nodes()) {
        throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid has " +
                          std::to_string(grid_->nodes()) + " nodes");
    }
}

Field Field::constant(GridPtr grid, double c) {
    const int n = grid->nodes();
    return Field(std::move(grid), Eigen::VectorXd::Constant(n, c));
}

Field Field::sample(GridPtr grid, const std::function<double(double, double)>& f) {
    Eigen::VectorXd v(grid->nodes());
    for (int i = 0; i < grid->nodes(); ++i) {
        const auto p = grid->position(i);
        v[i] = f(p[0], p[1]);
    }
    return Field(std::move(grid), std::move(v));
}

void Field::require_same_grid(const Field& other) const {
    if (grid_ != other.grid_ && !grid_->same_shape(*other.grid_)) {
        throw ConfigError("fields live on different grids");
    }
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(other);
    values_ += other.values_;
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(other);
    values_ -= other.values_;
    return *this;
}

Field& Field::operator*=(double s) {
    values_ *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

// ---------------------------------------------------------------- Grid

Grid::Grid(int dim, std::array<int, 2> n, std::array<double, 2> length)
    : dim_(dim), n_(n), length_(length), h_{0.0, 0.0}, volume_(1.0) {
    for (int a = 0; a < dim_; ++a) {
        if (n_[a] < 8) throw ConfigError("grid needs at least 8 nodes per axis");
        if (!(length_[a] > 0.0) || !std::isfinite(length_[a]))
            throw ConfigError("grid length must be positive and finite");
        h_[a] = length_[a] / (n_[a] - 1);
    }
    if (dim_ == 1) {
        n_[1] = 1;
        length_[1] = 1.0;
    }
    const Eigen::VectorXd wx = axis_weights(0);
    if (dim_ == 1) {
        weights_ = wx;
    } else {
        const Eigen::VectorXd wy = axis_weights(1);
        weights_.resize(n_[0] * n_[1]);
        for (int j = 0; j < n_[1]; ++j)
            for (int i = 0; i < n_[0]; ++i) weights_[i + n_[0] * j] = wx[i] * wy[j];
    }
    volume_ = weights_.sum();
    sqrt_weights_ = weights_.cwiseSqrt();
}

GridPtr Grid::make_1d(int n, double length) {
    return GridPtr(new Grid(1, {n, 1}, {length, 1.0}));
}

GridPtr Grid::make_2d(int nx, int ny, double lx, double ly) {
    return GridPtr(new Grid(2, {nx, ny}, {lx, ly}));
}

Eigen::VectorXd Grid::axis_weights(int axis) const {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n_[axis], h_[axis]);
    w[0] *= 0.5;
    w[n_[axis] - 1] *= 0.5;
    return w;
}

std::array<double, 2> Grid::position(int node) const {
    const int i = node % n_[0];
    const int j = node / n_[0];
    return {i * h_[0], dim_ == 2 ? j * h_[1] : 0.0};
}

bool Grid::same_shape(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
}

void Grid::apply_laplacian(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out.resize(x.size());
    const int nx = n_[0];
    const int ny = n_[1];
    const double cx = 1.0 / (h_[0] * h_[0]);
    for (int j = 0; j < ny; ++j) {
        const int base = nx * j;
        for (int i = 0; i < nx; ++i) {
            const double left = x[base + (i > 0 ? i - 1 : 1)];
            const double right = x[base + (i < nx - 1 ? i + 1 : nx - 2)];
            out[base + i] = cx * (left - 2.0 * x[base + i] + right);
        }
    }
    if (dim_ == 2) {
        const double cy = 1.0 / (h_[1] * h_[1]);
        for (int j = 0; j < ny; ++j) {
            const int down = j > 0 ? j - 1 : 1;
            const int up = j < ny - 1 ? j + 1 : ny - 2;
            for (int i = 0; i < nx; ++i) {
                out[i + nx * j] += cy * (x[i + nx * down] - 2.0 * x[i + nx * j] + x[i + nx * up]);
            }
        }
    }
}

Field Grid::laplacian(const Field& f) const {
    if (!same_shape(f.grid())) throw ConfigError("field does not live on this grid");
    Eigen::VectorXd out;
    apply_laplacian(f.values(), out);
    return Field(f.grid_ptr(), std::move(out));
}

Eigen::SparseMatrix<double> Grid::laplacian_sparse() const {
    std::vector<Eigen::Triplet<double>> t;
    const int nx = n_[0];
    const int ny = n_[1];
    t.reserve(static_cast<std::size_t>(nodes()) * (dim_ == 1 ? 3 : 5));
    const double cx = 1.0 / (h_[0] * h_[0]);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int row = i + nx * j;
            t.emplace_back(row, row, -2.0 * cx);
            t.emplace_back(row, nx * j + (i > 0 ? i - 1 : 1), cx);
            t.emplace_back(row, nx * j + (i < nx - 1 ? i + 1 : nx - 2), cx);
            if (dim_ == 2) {
                const double cy = 1.0 / (h_[1] * h_[1]);
                t.emplace_back(row, row, -2.0 * cy);
                t.emplace_back(row, i + nx * (j > 0 ? j - 1 : 1), cy);
                t.emplace_back(row, i + nx * (j < ny - 1 ? j + 1 : ny - 2), cy);
            }
        }
    }
    Eigen::SparseMatrix<double> m(nodes(), nodes());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Eigen::MatrixXd Grid::laplacian_matrix() const { return Eigen::MatrixXd(laplacian_sparse()); }

double Grid::integral(const Field& f) const { return weights_.dot(f.values()); }

double Grid::mean(const Field& f) const { return integral(f) / volume_; }

Field Grid::project_zero_mean(const Field& f) const {
    Field out = f;
    out.values().array() -= mean(f);
    return out;
}

double Grid::inner(const Field& a, const Field& b) const {
    a.require_same_grid(b);
    return (weights_.array() * a.values().array() * b.values().array()).sum();
}

double Grid::norm(const Field& f) const { return std::sqrt(inner(f, f)); }

double Grid::grad_inner(const Field& a, const Field& b) const {
    a.require_same_grid(b);
    const auto& x = a.values();
    const auto& y = b.values();
    const int nx = n_[0];
    const int ny = n_[1];
    double sum = 0.0;
    // x-faces carry weight h_x * (trapezoid weight across y).
    const Eigen::VectorXd wy = dim_ == 2 ? axis_weights(1) : Eigen::VectorXd::Ones(1);
    for (int j = 0; j < ny; ++j) {
        double row = 0.0;
        for (int i = 0; i + 1 < nx; ++i) {
            const int p = i + nx * j;
            row += (x[p + 1] - x[p]) * (y[p + 1] - y[p]);
        }
        sum += wy[j] * row / h_[0];
    }
    if (dim_ == 2) {
        const Eigen::VectorXd wx = axis_weights(0);
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int p = i + nx * j;
                sum += wx[i] * (x[p + nx] - x[p]) * (y[p + nx] - y[p]) / h_[1];
            }
        }
    }
    return sum;
}

double Grid::grad_sup(const Field& f) const {
    const auto& x = f.values();
    const int nx = n_[0];
    const int ny = n_[1];
    double m = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            m = std::max(m, std::abs(x[i + 1 + nx * j] - x[i + nx * j]) / h_[0]);
    if (dim_ == 2) {
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i < nx; ++i)
                m = std::max(m, std::abs(x[i + nx * (j + 1)] - x[i + nx * j]) / h_[1]);
    }
    return m;
}

double Grid::axis_eigenvalue(int axis, int m) const {
    const double s = std::sin(std::numbers::pi * m * h_[axis] / (2.0 * length_[axis]));
    return 4.0 * s * s / (h_[axis] * h_[axis]);
}

Eigen::VectorXd Grid::axis_mode(int axis, int m) const {
    const int n = n_[axis];
    Eigen::VectorXd v(n);
    const long period = 2L * (n - 1);
    for (int i = 0; i < n; ++i) {
        // Reduce the phase exactly so that equal angles give equal values.
        long k = (static_cast<long>(m) * i) % period;
        if (k > n - 1) k = period - k;
        v[i] = std::cos(std::numbers::pi * static_cast<double>(k) / (n - 1));
    }
    const Eigen::VectorXd w = axis_weights(axis);
    v /= std::sqrt((w.array() * v.array().square()).sum());
    return v;
}

std::vector<Grid::ModeIndex> Grid::sorted_modes() const {
    std::vector<ModeIndex> modes;
    modes.reserve(nodes());
    for (int my = 0; my < n_[1]; ++my) {
        const double ey = dim_ == 2 ? axis_eigenvalue(1, my) : 0.0;
        for (int mx = 0; mx < n_[0]; ++mx) modes.push_back({axis_eigenvalue(0, mx) + ey, mx, my});
    }
    std::stable_sort(modes.begin(), modes.end(),
                     [](const ModeIndex& a, const ModeIndex& b) { return a.eta < b.eta; });
    return modes;
}

std::vector<NeumannMode> Grid::neumann_eigenpairs(int count) const {
    if (count < 0 || count > nodes()) {
        throw ConfigError("requested " + std::to_string(count) + " eigenpairs on a grid with " +
                          std::to_string(nodes()) + " nodes");
    }
    const GridPtr self = shared_from_this();
    const auto modes = sorted_modes();
    std::vector<NeumannMode> out;
    out.reserve(count);
    for (int q = 0; q < count; ++q) {
        const auto& m = modes[q];
        Eigen::VectorXd vx = axis_mode(0, m.mx);
        Eigen::VectorXd v(nodes());
        if (dim_ == 1) {
            v = vx;
        } else {
            const Eigen::VectorXd vy = axis_mode(1, m.my);
            for (int j = 0; j < n_[1]; ++j)
                for (int i = 0; i < n_[0]; ++i) v[i + n_[0] * j] = vx[i] * vy[j];
        }
        out.push_back({m.eta, Field(self, std::move(v))});
    }
    return out;
}

std::vector<double> Grid::neumann_eigenvalues() const {
    std::vector<double> out;
    for (const auto& m : sorted_modes()) out.push_back(m.eta);
    return out;
}

double Grid::eta2() const {
    double e = axis_eigenvalue(0, 1);
    if (dim_ == 2) e = std::min(e, axis_eigenvalue(1, 1));
    return e;
}

Eigen::MatrixXd Grid::eigenvector_matrix() const {
    const auto modes = sorted_modes();
    Eigen::MatrixXd phi(nodes(), nodes());
    std::array<Eigen::MatrixXd, 2> axis;
    for (int a = 0; a < dim_; ++a) {
        axis[a].resize(n_[a], n_[a]);
        for (int m = 0; m < n_[a]; ++m) axis[a].col(m) = axis_mode(a, m);
    }
    for (int q = 0; q < nodes(); ++q) {
        const auto& m = modes[q];
        if (dim_ == 1) {
            phi.col(q) = axis[0].col(m.mx);
        } else {
            for (int j = 0; j < n_[1]; ++j)
                for (int i = 0; i < n_[0]; ++i)
                    phi(i + n_[0] * j, q) = axis[0](i, m.mx) * axis[1](j, m.my);
        }
    }
    return phi;
}

// ------------------------------------------------- ShiftedLaplacianSolver

ShiftedLaplacianSolver::ShiftedLaplacianSolver(GridPtr grid, double a, double b)
    : grid_(std::move(grid)), a_(a), b_(b) {
    if (!(a_ > 0.0) || b_ < 0.0) throw ConfigError("shifted Laplacian needs a > 0 and b >= 0");
    if (grid_->dim() == 1) {
        const int n = grid_->nodes();
        const double c = b_ / (grid_->spacing(0) * grid_->spacing(0));
        Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -c);
        Eigen::VectorXd up = Eigen::VectorXd::Constant(n, -c);
        up[0] = -2.0 * c;
        lo[n - 1] = -2.0 * c;
        lower_.resize(n);
        diag_.resize(n);
        upper_ = up;
        diag_[0] = a_ + 2.0 * c;
        lower_[0] = 0.0;
        for (int i = 1; i < n; ++i) {
            lower_[i] = lo[i] / diag_[i - 1];
            diag_[i] = a_ + 2.0 * c - lower_[i] * up[i - 1];
        }
    } else {
        for (int ax = 0; ax < 2; ++ax) {
            const int n = grid_->n(ax);
            basis_[ax].resize(n, n);
            eta_[ax].resize(n);
            const Eigen::VectorXd w = grid_->axis_weights(ax);
            for (int m = 0; m < n; ++m) {
                basis_[ax].col(m) = grid_->axis_mode(ax, m);
                eta_[ax][m] = grid_->axis_eigenvalue(ax, m);
            }
            analysis_[ax] = basis_[ax].transpose() * w.asDiagonal();
        }
    }
}

Eigen::VectorXd ShiftedLaplacianSolver::solve(const Eigen::VectorXd& rhs) const {
    const int n = grid_->nodes();
    if (rhs.size() != n) throw ConfigError("right-hand side size does not match grid");
    if (grid_->dim() == 1) {
        Eigen::VectorXd x(n);
        x[0] = rhs[0];
        for (int i = 1; i < n; ++i) x[i] = rhs[i] - lower_[i] * x[i - 1];
        x[n - 1] /= diag_[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - upper_[i] * x[i + 1]) / diag_[i];
        return x;
    }
    const int nx = grid_->n(0);
    const int ny = grid_->n(1);
    Eigen::Map<const Eigen::MatrixXd> r(rhs.data(), nx, ny);
    Eigen::MatrixXd c = analysis_[0] * r * analysis_[1].transpose();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) c(i, j) /= a_ + b_ * (eta_[0][i] + eta_[1][j]);
    Eigen::MatrixXd x = basis_[0] * c * basis_[1].transpose();
    return Eigen::Map<Eigen::VectorXd>(x.data(), n);
}

Field ShiftedLaplacianSolver::solve(const Field& rhs) const {
    return Field(rhs.grid_ptr(), solve(rhs.values()));
}

Eigen::VectorXd ShiftedLaplacianSolver::solve_conservative(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = solve(rhs);
    // a * sum(w x) == sum(w rhs) holds exactly; remove the roundoff residue.
    const Eigen::VectorXd& w = grid_->weights();
    x.array() += (w.dot(rhs) / a_ - w.dot(x)) / grid_->volume();
    return x;
}

Field ShiftedLaplacianSolver::solve_conservative(const Field& rhs) const {
    return Field(rhs.grid_ptr(), solve_conservative(rhs.values()));
}

}  // namespace mcrd
