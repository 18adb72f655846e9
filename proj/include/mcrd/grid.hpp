#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace mcrd {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Nodal values of one scalar quantity on a grid.
class Field {
public:
    /// Empty placeholder, not attached to any grid.
    Field() = default;
    explicit Field(GridPtr grid);
    Field(GridPtr grid, Eigen::VectorXd values);

    static Field constant(GridPtr grid, double c);
    /// Samples f(x, y) at every node (y is 0 on 1D grids).
    static Field sample(GridPtr grid, const std::function<double(double, double)>& f);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }
    double& operator[](Eigen::Index i) { return values_[i]; }

    double min() const { return values_.minCoeff(); }
    double max() const { return values_.maxCoeff(); }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

    /// Throws ConfigError unless both fields live on the same grid.
    void require_same_grid(const Field& other) const;

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);

/// One eigenpair of the discrete Neumann Laplacian: -Lap_h mode = eta * mode,
/// with the mode normalized in the quadrature-weighted inner product.
struct NeumannMode {
    double eta;
    Field mode;
};

/// Node-centred tensor grid on (0, L1) or (0, L1) x (0, L2), boundary nodes
/// included. Neumann conditions are imposed by ghost-node reflection and the
/// quadrature is the trapezoid rule, so the discrete Laplacian is symmetric
/// in the weighted inner product and annihilates the weighted sum exactly.
class Grid : public std::enable_shared_from_this<Grid> {
public:
    static GridPtr make_1d(int n, double length = 1.0);
    static GridPtr make_2d(int nx, int ny, double lx = 1.0, double ly = 1.0);

    int dim() const { return dim_; }
    int nodes() const { return static_cast<int>(weights_.size()); }
    int n(int axis) const { return n_[axis]; }
    double length(int axis) const { return length_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    double volume() const { return volume_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::VectorXd& sqrt_weights() const { return sqrt_weights_; }

    /// Physical coordinates of node `node` (second entry 0 in 1D).
    std::array<double, 2> position(int node) const;

    bool same_shape(const Grid& other) const;

    Field laplacian(const Field& f) const;
    void apply_laplacian(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
    Eigen::MatrixXd laplacian_matrix() const;
    Eigen::SparseMatrix<double> laplacian_sparse() const;

    double integral(const Field& f) const;
    double mean(const Field& f) const;
    Field project_zero_mean(const Field& f) const;

    double inner(const Field& a, const Field& b) const;
    double norm(const Field& f) const;
    /// Face-weighted forward-difference inner product (grad a, grad b);
    /// satisfies (-Lap_h a, b) == (grad a, grad b) exactly up to roundoff.
    double grad_inner(const Field& a, const Field& b) const;
    double grad_norm_sq(const Field& f) const { return grad_inner(f, f); }
    /// Largest one-sided difference quotient magnitude over all faces.
    double grad_sup(const Field& f) const;

    /// Eigenvalue of the 1D discrete Neumann Laplacian along `axis` for
    /// cosine mode m = 0, 1, ...: (4 / h^2) sin^2(pi m h / (2 L)).
    double axis_eigenvalue(int axis, int m) const;
    /// Sampled cos(pi m x / L) along `axis`, weighted-unit-norm in 1D.
    Eigen::VectorXd axis_mode(int axis, int m) const;

    /// The `count` smallest eigenpairs, ascending; the first is (0, constant).
    std::vector<NeumannMode> neumann_eigenpairs(int count) const;
    /// All discrete eigenvalues, ascending.
    std::vector<double> neumann_eigenvalues() const;
    /// Smallest positive discrete eigenvalue.
    double eta2() const;

    /// Dense matrix whose columns are all weighted-orthonormal eigenvectors,
    /// ordered as neumann_eigenvalues().
    Eigen::MatrixXd eigenvector_matrix() const;

private:
    Grid(int dim, std::array<int, 2> n, std::array<double, 2> length);

    struct ModeIndex {
        double eta;
        int mx;
        int my;
    };
    std::vector<ModeIndex> sorted_modes() const;
    Eigen::VectorXd axis_weights(int axis) const;

    int dim_;
    std::array<int, 2> n_;
    std::array<double, 2> length_;
    std::array<double, 2> h_;
    double volume_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd sqrt_weights_;

    friend class ShiftedLaplacianSolver;
};

/// Solves (a I - b Lap_h) x = rhs for fixed a > 0, b >= 0.
/// 1D uses a prefactored tridiagonal (Thomas) elimination; 2D diagonalizes
/// along each axis with the discrete cosine eigenbasis.
class ShiftedLaplacianSolver {
public:
    ShiftedLaplacianSolver(GridPtr grid, double a, double b);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Field solve(const Field& rhs) const;
    /// solve() followed by a constant shift that makes a * int x == int rhs
    /// hold to roundoff of a single sum.
    Eigen::VectorXd solve_conservative(const Eigen::VectorXd& rhs) const;
    Field solve_conservative(const Field& rhs) const;

private:
    GridPtr grid_;
    double a_;
    double b_;
    // 1D: modified diagonal and multipliers of the LU factorization.
    Eigen::VectorXd lower_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd upper_;
    // 2D: per-axis eigenbases (columns weighted-orthonormal) and eigenvalues.
    std::array<Eigen::MatrixXd, 2> basis_;
    std::array<Eigen::MatrixXd, 2> analysis_;
    std::array<Eigen::VectorXd, 2> eta_;
};

}  // namespace mcrd
