#include "doctest.h"
#include "mcrd/energy.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/stationary.hpp"
#include "support.hpp"

using namespace mcrd;

TEST_CASE("Lyapunov functional of constants") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    const double c = 1.7, d = -0.4;
    const double l = lyapunov(Field::constant(grid, c), Field::constant(grid, d), p).total;
    CHECK(l == doctest::Approx(0.5 * p.k * d * d - p.xi * G(c, p)).epsilon(1e-13));
    CHECK(lyapunov(Field::constant(grid, 0.0), Field::constant(grid, 0.0), p).total == 0.0);
}

TEST_CASE("Lyapunov functional parts add up") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    const EnergyBreakdown e = lyapunov(testing::random_field(grid, 1, 0.5, 2.0), testing::random_field(grid, 2), p);
    double sum = 0.0;
    for (const auto& [name, value] : e.parts) sum += value;
    CHECK(sum == doctest::Approx(e.total).epsilon(1e-14));
}

TEST_CASE("Lyapunov functional converges at second order") {
    const ModelParams p = testing::reference_params();
    std::vector<double> values;
    for (int n : {65, 129, 257}) {
        const GridPtr grid = Grid::make_1d(n);
        const Field z = Field::sample(grid, [](double x, double) { return 2.0 + 0.5 * std::cos(M_PI * x); });
        const Field w = Field::sample(grid, [](double x, double) { return 0.3 * std::cos(2 * M_PI * x); });
        values.push_back(lyapunov(z, w, p).total);
    }
    const double ratio = (values[0] - values[1]) / (values[1] - values[2]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("J of constants") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    const double c = 2.2, lambda = 1.3;
    const double j = j_functional(Field::constant(grid, c), p, lambda).total;
    CHECK(j == doctest::Approx(-G(c, p) - p.k * lambda * c + 0.5 * p.k * p.xi * c * c).epsilon(1e-13));
    CHECK(j_functional(Field::constant(grid, 0.0), p, lambda).total == 0.0);
}

TEST_CASE("gradient of J matches central differences") {
    const ModelParams p = testing::turing_params();
    for (const GridPtr& grid : {Grid::make_1d(256), Grid::make_2d(16, 12)}) {
        const double lambda = 2.3;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Field z = testing::random_field(grid, 100 + seed, 0.5, 3.0);
            const Field phi = testing::random_field(grid, 200 + seed);
            const double eps = 1e-5;
            const double fd = (j_functional(z + eps * phi, p, lambda).total -
                               j_functional(z - eps * phi, p, lambda).total) / (2 * eps);
            const double an = grid->inner(j_gradient(z, p, lambda), phi);
            CHECK(std::abs(fd - an) / std::abs(an) < 1e-5);
        }
    }
}

TEST_CASE("gradient vanishes at homogeneous roots") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(64);
    const double lambda = lambda_for_homogeneous(p, 2.0);
    const Field grad = j_gradient(Field::constant(grid, 2.0), p, lambda);
    CHECK(testing::max_abs(grad) < 1e-12);
}

TEST_CASE("semi-unfolding inequality") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(128);
    const Field z = testing::random_field(grid, 3, 1.0, 3.0);
    const double lambda = 2.5;
    const double wb = w_bar(z, p, lambda);
    CHECK(mass_lambda(z, Field::constant(grid, wb), p) == doctest::Approx(lambda).epsilon(1e-15));

    const SemiUnfoldingReport eq = semi_unfolding_check(z, Field::constant(grid, wb), p, lambda);
    CHECK(std::abs(eq.gap) < 1e-12);
    CHECK(eq.identity_error < 1e-12);
    CHECK(eq.inequality_holds);

    const Field w = Field::constant(grid, wb) + grid->project_zero_mean(testing::random_field(grid, 4));
    const SemiUnfoldingReport rep = semi_unfolding_check(z, w, p, lambda);
    const Field dev = w - Field::constant(grid, wb);
    const double predicted = 0.5 * p.k * grid->inner(dev, dev) + 0.5 * (p.alpha + p.D) * grid->grad_norm_sq(w);
    CHECK(rep.gap > 0.0);
    CHECK(std::abs(rep.gap - predicted) < 1e-10 * std::max(1.0, predicted));
    CHECK(std::abs(rep.predicted_gap - predicted) < 1e-10 * std::max(1.0, predicted));
    CHECK(rep.lyapunov >= rep.reduced);

    CHECK_THROWS_AS(semi_unfolding_check(z, w, p, lambda + 1e-6), ConfigError);
}
