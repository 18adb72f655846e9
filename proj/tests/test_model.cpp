#include "doctest.h"
#include "mcrd/errors.hpp"
#include "mcrd/model.hpp"
#include "support.hpp"

using namespace mcrd;

TEST_CASE("derived constants") {
    const ModelParams p = derive_params(0.25, 2.0, 1.0, 1.0);
    CHECK(p.xi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.alpha == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p.k == 1.0);

    const ModelParams q = derive_params(4.0, 0.5, 1.0, 1.0);
    CHECK(q.xi == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(q.alpha == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(q.k == 1.0);
}

TEST_CASE("rejected parameter sets") {
    CHECK_THROWS_AS(derive_params(1.0, 2.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(derive_params(0.25, 1.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(derive_params(-0.25, 2.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(derive_params(0.25, 2.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(derive_params(0.25, 2.0, 1.0, -1.0), ConfigError);
    // xi = (1 - tau D)/(tau - 1) < 0
    CHECK_THROWS_AS(derive_params(0.6, 2.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("reaction kinetics values") {
    const ModelParams p = testing::reference_params();
    CHECK(h(0.0, p) == 0.0);
    CHECK(h(1.0, p) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(h(3.0, p) == doctest::Approx(-3.0 / 16.0).epsilon(1e-15));
    CHECK(g(0.0, p) == 0.0);
    CHECK(G(0.0, p) == 0.0);
    CHECK(g(1.0, p) == doctest::Approx(-0.4375).epsilon(1e-15));
}

TEST_CASE("G matches quadrature of g") {
    for (const ModelParams& p : {testing::reference_params(), derive_params(4.0, 0.5, 2.0, 0.5)}) {
        for (double z : {0.5, 2.0, 7.0}) {
            const double quad = testing::simpson([&](double x) { return g(x, p); }, 0.0, z, 1e-13);
            CHECK(std::abs(G(z, p) - quad) < 1e-10);
        }
    }
}

TEST_CASE("derivatives match central differences") {
    const ModelParams p = derive_params(0.1, 3.0, 1.5, 0.7);
    const double eps = 1e-6;
    for (double z : {0.0, 0.3, 1.0, 2.5, 9.0}) {
        const double fd_h = (h(z + eps, p) - h(z - eps, p)) / (2 * eps);
        const double fd_g = (g(z + eps, p) - g(z - eps, p)) / (2 * eps);
        CHECK(std::abs(h_prime(z, p) - fd_h) < 1e-8);
        CHECK(std::abs(g_prime(z, p) - fd_g) < 1e-8);
    }
}

TEST_CASE("reaction term combines h and the linear exchange") {
    const ModelParams p = testing::reference_params();
    CHECK(reaction(0.0, 0.0, p) == 0.0);
    CHECK(reaction(1.0, 2.0, p) == doctest::Approx(h(3.0, p) + 2.0).epsilon(1e-15));
}

TEST_CASE("change of variables") {
    const ModelParams p = testing::reference_params();
    const GridPtr grid = Grid::make_1d(16);
    {
        const auto [z, w] = to_zw(Field::constant(grid, 0.0), Field::constant(grid, 0.0), p);
        CHECK(testing::max_abs(z) == 0.0);
        CHECK(testing::max_abs(w) == 0.0);
    }
    {
        const auto [z, w] = to_zw(Field::constant(grid, 1.0), Field::constant(grid, 2.0), p);
        CHECK(z[3] == doctest::Approx(3.0));
        CHECK(w[3] == doctest::Approx(2.25));
        const auto [u, v] = from_zw(z, w, p);
        CHECK(u[3] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(v[3] == doctest::Approx(2.0).epsilon(1e-14));
    }
    {
        const GridPtr big = Grid::make_1d(256);
        const Field u0 = testing::random_field(big, 7, 0.0, 5.0);
        const Field v0 = testing::random_field(big, 8, 0.0, 5.0);
        const auto [z, w] = to_zw(u0, v0, p);
        const auto [u, v] = from_zw(z, w, p);
        CHECK(testing::max_abs(u - u0) < 1e-13);
        CHECK(testing::max_abs(v - v0) < 1e-13);
    }
    const ModelParams unit = derive_params(4.0, 0.5, 1.0, 1.0);
    ModelParams singular = unit;
    singular.D = 1.0;
    CHECK_THROWS_AS(from_zw(Field::constant(grid, 1.0), Field::constant(grid, 1.0), singular), ConfigError);
}
