#include <Eigen/Eigenvalues>
#include <algorithm>

#include "doctest.h"
#include "mcrd/errors.hpp"
#include "mcrd/spectra.hpp"
#include "mcrd/stationary.hpp"
#include "support.hpp"

using namespace mcrd;

namespace {

constexpr int kN = 64;

// Per-mode 2x2 eigenvalues from Eigen's general solver.
std::vector<Complex> mode_oracle(const ModelParams& p, double z_bar, bool restricted) {
    const double gp = g_prime(z_bar, p);
    std::vector<Complex> out;
    for (double eta : testing::neumann_dispersion(kN, 1.0)) {
        Eigen::Matrix2d m, a1;
        m << 1.0 + p.D * p.xi / p.alpha, -p.xi / p.alpha, p.xi, 1.0;
        a1 << p.D * eta - gp, -p.k, 0.0, p.alpha * eta;
        Eigen::EigenSolver<Eigen::Matrix2d> es(m.inverse() * a1);
        std::vector<Complex> pair = {es.eigenvalues()[0], es.eigenvalues()[1]};
        if (eta == 0.0 && restricted) {
            std::sort(pair.begin(), pair.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
            pair.erase(pair.begin());
        }
        out.insert(out.end(), pair.begin(), pair.end());
    }
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

double max_gap(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
    return gap;
}

}  // namespace

TEST_CASE("Hessian spectrum at a homogeneous state") {
    for (const ModelParams& p : {testing::reference_params(), testing::turing_params()}) {
        const GridPtr grid = Grid::make_1d(kN);
        const SelfAdjointOperator op = build_L(Field::constant(grid, 2.0), p);
        const auto eigs = symmetric_eigenvalues(op.symmetric);
        std::vector<double> oracle;
        const auto eta = testing::neumann_dispersion(kN, 1.0);
        for (std::size_t l = 0; l < eta.size(); ++l)
            oracle.push_back(p.D * eta[l] - g_prime(2.0, p) + (l == 0 ? p.k * p.xi : 0.0));
        std::sort(oracle.begin(), oracle.end());
        for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(eigs[i] - oracle[i]) < 1e-10);

        const Eigen::MatrixXd wl = grid->weights().asDiagonal() * op.nodal;
        CHECK((wl - wl.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("linearization spectrum at a homogeneous state") {
    for (const ModelParams& p : {testing::reference_params(), testing::turing_params()}) {
        const GridPtr grid = Grid::make_1d(kN);
        const ConstrainedOperator a = build_A(Field::constant(grid, 2.0), p);
        CHECK(a.basis.cols() == 2 * kN - 1);
        const auto restricted = general_eigenvalues(a.restricted);
        const auto full = general_eigenvalues(a.full);
        CHECK(max_gap(restricted, mode_oracle(p, 2.0, true)) < 1e-8);
        CHECK(max_gap(full, mode_oracle(p, 2.0, false)) < 1e-8);

        auto smallest = [](const std::vector<Complex>& v) {
            double m = 1e300;
            for (auto c : v) m = std::min(m, std::abs(c));
            return m;
        };
        CHECK(smallest(full) < 1e-8);
        CHECK(smallest(restricted) > 1e-3);

        // Closed under conjugation.
        for (const Complex& c : restricted) {
            if (std::abs(c.imag()) < 1e-12) continue;
            double best = 1e300;
            for (const Complex& d : restricted) best = std::min(best, std::abs(d - std::conj(c)));
            CHECK(best < 1e-8);
        }
    }
}

TEST_CASE("Morse indices on the presets") {
    const GridPtr grid = Grid::make_1d(kN);
    const SpectrumReport stable = spectrum_counts(Field::constant(grid, 2.0), testing::reference_params());
    CHECK(stable.morse_L == 0);
    CHECK(stable.morse_A == 0);
    CHECK(stable.realness_violations.empty());
    CHECK(stable.hypothesis_holds);

    const ModelParams tp = testing::turing_params();
    const SpectrumReport unstable = spectrum_counts(Field::constant(grid, 2.0), tp);
    int oracle_morse = 0;
    for (double eta : testing::neumann_dispersion(kN, 1.0))
        oracle_morse += (tp.D * eta - g_prime(2.0, tp) + (eta == 0.0 ? tp.k * tp.xi : 0.0)) < 0.0;
    CHECK(oracle_morse >= 1);
    CHECK(unstable.morse_L == oracle_morse);
    CHECK(unstable.morse_A == oracle_morse);
    CHECK(unstable.zero_A == unstable.zero_L);
    CHECK(unstable.realness_violations.empty());
    CHECK(unstable.comparison_ok);
    CHECK(unstable.realness_threshold == doctest::Approx(tp.alpha * tp.k / (2 * tp.xi)));
    CHECK(unstable.stated_threshold == doctest::Approx(tp.k / (2 * tp.xi)));
}

TEST_CASE("weighted norm operator") {
    for (const ModelParams& p : {testing::reference_params(), testing::turing_params()}) {
        const GridPtr grid = Grid::make_1d(kN);
        const double c0 = 1.0 + p.xi * (p.D + p.xi) / p.alpha;
        CHECK(weighted_norm_constant(p) == doctest::Approx(c0));
        const auto pairs = grid->neumann_eigenpairs(5);
        for (double s : {-p.k / p.xi + 0.01, 0.0, 1.0, 10.0}) {
            const Field one = Field::constant(grid, 1.0);
            CHECK(testing::max_abs(apply_weighted_norm(s, p, one) - c0 * one) < 1e-12);
            for (std::size_t l = 1; l < pairs.size(); ++l) {
                const double eta = pairs[l].eta;
                const double m = (1 + p.D * p.xi / p.alpha) + (p.xi / p.alpha) * (p.k + s * p.xi) / (eta + s);
                CHECK(weighted_norm_multiplier(eta, s, p) == doctest::Approx(m));
                CHECK(testing::max_abs(apply_weighted_norm(s, p, pairs[l].mode) - m * pairs[l].mode) < 1e-10);
            }
            const Eigen::MatrixXd ms = weighted_norm_matrix(s, p, *grid);
            CHECK((ms - ms.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(symmetric_eigenvalues(ms).front() > 0.0);
        }
        CHECK_THROWS_AS(weighted_norm_matrix(-grid->eta2() - 1.0, p, *grid), ConfigError);
    }
}

TEST_CASE("mu curves at a homogeneous state match the per-mode closed form") {
    for (const ModelParams& p : {testing::reference_params(), testing::turing_params()}) {
        const GridPtr grid = Grid::make_1d(kN);
        const MuSolver solver(Field::constant(grid, 2.0), p);
        const auto eta = testing::neumann_dispersion(kN, 1.0);
        for (double s : {0.1, 1.0, 10.0}) {
            std::vector<double> oracle;
            for (std::size_t l = 0; l < eta.size(); ++l) {
                if (l == 0) {
                    const double c0 = 1.0 + p.xi * (p.D + p.xi) / p.alpha;
                    oracle.push_back((-g_prime(2.0, p) + p.k * p.xi) / c0);
                } else {
                    const double m =
                        (1 + p.D * p.xi / p.alpha) + (p.xi / p.alpha) * (p.k + s * p.xi) / (eta[l] + s);
                    oracle.push_back((p.D * eta[l] - g_prime(2.0, p)) / m);
                }
            }
            std::sort(oracle.begin(), oracle.end());
            const auto mu = solver.eigenvalues(s);
            for (std::size_t i = 0; i < oracle.size(); ++i)
                CHECK(std::abs(mu[i] - oracle[i]) < 1e-10 * std::max(1.0, std::abs(oracle[i])));
        }
    }
}

TEST_CASE("mu curve samples satisfy the Rayleigh identity") {
    const GridPtr grid = Grid::make_1d(kN);
    std::vector<double> s_grid;
    for (int i = 1; i <= 50; ++i) s_grid.push_back(10.0 * i / 50);
    const MuCurve curve = mu_curve(Field::constant(grid, 2.0), testing::turing_params(), s_grid, 4);
    CHECK(curve.samples.size() == 200);
    CHECK(curve.max_rayleigh_error < 1e-10);
    CHECK(curve.curve(1).size() == 50);
}

TEST_CASE("positive mu branches are nonincreasing") {
    const GridPtr grid = Grid::make_1d(kN);
    std::vector<double> s_grid;
    for (int i = 1; i <= 50; ++i) s_grid.push_back(10.0 * i / 50);
    const MuCurve curve = mu_curve(Field::constant(grid, 2.0), testing::reference_params(), s_grid, 6);
    for (int j = 1; j <= 6; ++j) {
        const auto c = curve.curve(j);
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            REQUIRE(c[i] > 0.0);
            CHECK(c[i + 1] <= c[i] + 1e-10);
        }
    }
}

TEST_CASE("negative mu branches") {
    // M(s) grows with s when xi eta2 > k, so a negative mu_j rises towards 0
    // while mu_j / s still increases strictly.
    const GridPtr grid = Grid::make_1d(kN);
    std::vector<double> s_grid;
    for (int i = 1; i <= 50; ++i) s_grid.push_back(10.0 * i / 50);
    const MuCurve curve = mu_curve(Field::constant(grid, 2.0), testing::turing_params(), s_grid, 2);
    const auto c = curve.curve(1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        REQUIRE(c[i] < 0.0);
        CHECK(c[i + 1] >= c[i] - 1e-10);
        CHECK(c[i + 1] / s_grid[i + 1] > c[i] / s_grid[i]);
    }
}

TEST_CASE("fixed-point recovery of negative eigenvalues") {
    const GridPtr grid = Grid::make_1d(kN);
    CHECK(negative_eigs_by_fixed_point(Field::constant(grid, 2.0), testing::reference_params()).empty());

    const ModelParams p = testing::turing_params();
    const auto sigmas = negative_eigs_by_fixed_point(Field::constant(grid, 2.0), p);
    const auto oracle = mode_oracle(p, 2.0, true);
    std::vector<double> negatives;
    for (const Complex& c : oracle)
        if (c.real() < 0.0) negatives.push_back(c.real());
    REQUIRE(sigmas.size() == negatives.size());
    for (std::size_t i = 0; i < sigmas.size(); ++i) CHECK(std::abs(sigmas[i] - negatives[i]) < 1e-8);
    CHECK(sigmas.size() == static_cast<std::size_t>(spectrum_counts(Field::constant(grid, 2.0), p).morse_L));
}

TEST_CASE("full spectral report on a patterned state") {
    const ModelParams p = testing::turing_params();
    const GridPtr grid = Grid::make_1d(kN);
    const double lambda = lambda_for_homogeneous(p, 2.0);
    const Field guess = relax_gradient_flow(cosine_guess(grid, 2.0, 0.5), p, lambda, 0.1, 1e-9, 200000);
    const StationaryState s = newton_solve(guess, p, lambda);
    REQUIRE(s.z_star.max() - s.z_star.min() > 1e-3);
    const SpectrumReport rep = spectral_report(s.z_star, p);
    CHECK(rep.morse_A == rep.morse_L);
    CHECK(rep.zero_A == rep.zero_L);
    CHECK(rep.realness_ok);
    CHECK(rep.defective_clusters == 0);
    CHECK(rep.fixed_point_sigmas.size() == static_cast<std::size_t>(rep.morse_L));
    CHECK_FALSE(rep.mu_samples.empty());
}
