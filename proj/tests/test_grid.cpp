#include "doctest.h"
#include "mcrd/errors.hpp"
#include "mcrd/grid.hpp"
#include "support.hpp"

using namespace mcrd;

TEST_CASE("laplacian of constants vanishes") {
    for (const GridPtr& grid : {Grid::make_1d(64), Grid::make_2d(16, 24, 1.0, 2.0)})
        CHECK(testing::max_abs(grid->laplacian(Field::constant(grid, 3.7))) < 1e-10);
}

TEST_CASE("laplacian of a cosine") {
    const GridPtr grid = Grid::make_1d(256);
    const Field f = Field::sample(grid, [](double x, double) { return std::cos(M_PI * x); });
    const Field exact = Field::sample(grid, [](double x, double) { return -M_PI * M_PI * std::cos(M_PI * x); });
    CHECK(testing::max_abs(grid->laplacian(f) - exact) < 4e-4);
}

TEST_CASE("laplacian error is second order") {
    double prev = 0.0;
    for (int n : {33, 65, 129}) {
        const GridPtr grid = Grid::make_1d(n, 2.0);
        const auto f = [](double x, double) { return std::cos(1.5 * M_PI * x) + 0.3 * std::cos(M_PI * x); };
        const auto lap = [](double x, double) {
            return -2.25 * M_PI * M_PI * std::cos(1.5 * M_PI * x) - 0.3 * M_PI * M_PI * std::cos(M_PI * x);
        };
        const double err = testing::max_abs(grid->laplacian(Field::sample(grid, f)) - Field::sample(grid, lap));
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("2D laplacian of a product of cosines") {
    const GridPtr grid = Grid::make_2d(129, 65, 1.0, 0.5);
    const Field f = Field::sample(grid, [](double x, double y) { return std::cos(M_PI * x) * std::cos(2 * M_PI * y); });
    const double eta = M_PI * M_PI + 4 * M_PI * M_PI;
    const Field lap = grid->laplacian(f);
    CHECK(testing::max_abs(lap + eta * f) < 2e-2);
}

TEST_CASE("laplacian conserves the weighted sum") {
    for (const GridPtr& grid : {Grid::make_1d(256), Grid::make_2d(32, 20)}) {
        const Field f = testing::random_field(grid, 3);
        CHECK(std::abs(grid->integral(grid->laplacian(f))) < 1e-12 * grid->nodes());
    }
}

TEST_CASE("mean and zero-mean projection") {
    const GridPtr grid = Grid::make_1d(100, 3.0);
    CHECK(grid->volume() == doctest::Approx(3.0));
    CHECK(grid->mean(Field::constant(grid, 2.5)) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(testing::max_abs(grid->project_zero_mean(Field::constant(grid, 2.5))) < 1e-15);
    const Field f = testing::random_field(grid, 11);
    CHECK(std::abs(grid->mean(grid->project_zero_mean(f))) < 1e-13);
}

TEST_CASE("discrete Neumann eigenpairs") {
    const GridPtr grid = Grid::make_1d(256);
    const auto pairs = grid->neumann_eigenpairs(6);
    CHECK(pairs[0].eta == 0.0);
    CHECK(pairs[0].mode.max() - pairs[0].mode.min() < 1e-14);
    CHECK(grid->eta2() == doctest::Approx(M_PI * M_PI).epsilon(2e-4));
    const auto oracle = testing::neumann_dispersion(256, 1.0);
    for (std::size_t l = 0; l < pairs.size(); ++l) {
        CHECK(pairs[l].eta == doctest::Approx(oracle[l]).epsilon(1e-12));
        CHECK(testing::max_abs(grid->laplacian(pairs[l].mode) + pairs[l].eta * pairs[l].mode) < 1e-10);
        CHECK(grid->norm(pairs[l].mode) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto all = grid->neumann_eigenvalues();
    REQUIRE(all.size() == oracle.size());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(std::abs(all[i] - oracle[i]) < 1e-9);
}

TEST_CASE("eigenvector matrix is weighted-orthonormal") {
    const GridPtr grid = Grid::make_2d(12, 9);
    const Eigen::MatrixXd v = grid->eigenvector_matrix();
    const Eigen::MatrixXd gram = v.transpose() * grid->weights().asDiagonal() * v;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inner products and summation by parts") {
    const GridPtr grid = Grid::make_1d(128, 2.0);
    const Field f = testing::random_field(grid, 5);
    CHECK(grid->inner(f, f) > 0.0);
    CHECK(grid->inner(Field::constant(grid, 0.0), Field::constant(grid, 0.0)) == 0.0);
    CHECK(grid->grad_norm_sq(Field::constant(grid, 4.0)) == 0.0);
    for (const GridPtr& g : {grid, Grid::make_2d(24, 17, 1.0, 0.7)}) {
        const Field phi = testing::random_field(g, 9);
        const double lhs = -g->inner(g->laplacian(phi), phi);
        const double rhs = g->grad_norm_sq(phi);
        CHECK(std::abs(lhs - rhs) / rhs < 1e-12);
    }
}

TEST_CASE("shifted laplacian solver inverts a I - b Lap") {
    for (const GridPtr& grid : {Grid::make_1d(200, 1.5), Grid::make_2d(20, 30, 1.0, 2.0)}) {
        const Field rhs = testing::random_field(grid, 2);
        const ShiftedLaplacianSolver solver(grid, 2.0, 0.3);
        const Field x = solver.solve(rhs);
        const Field back = 2.0 * x - 0.3 * grid->laplacian(x);
        CHECK(testing::max_abs(back - rhs) < 1e-10);
        const Field y = solver.solve_conservative(rhs);
        CHECK(std::abs(2.0 * grid->integral(y) - grid->integral(rhs)) < 1e-14);
    }
    CHECK_THROWS_AS(ShiftedLaplacianSolver(Grid::make_1d(10), 0.0, 1.0), ConfigError);
}

TEST_CASE("fields on different grids do not mix") {
    Field a = Field::constant(Grid::make_1d(10), 1.0);
    const Field b = Field::constant(Grid::make_1d(12), 1.0);
    CHECK_THROWS_AS(a += b, ConfigError);
}
