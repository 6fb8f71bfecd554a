#include "doctest.h"
#include "oracles.hpp"

#include "mixlab/error.hpp"
#include "mixlab/experiment.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

using namespace mixlab;
using doctest::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double max_rel_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return m / scale;
}

} // namespace

TEST_CASE("local stencil")
{
    const TridiagonalMatrix one = assemble_local(Grid::build(0.0, 1.0, 1));
    CHECK(one.size() == 1);
    CHECK(one.entry(0, 0) == 8.0);

    for (std::size_t n : {2u, 7u, 100u}) {
        const Grid g = Grid::build(0.0, 1.0, n);
        const TridiagonalMatrix T = assemble_local(g);
        const GridFunction q = GridFunction::sample(g, [](double x) { return x * (1 - x); });
        std::vector<double> out(n);
        T.apply(q.values(), out);
        for (double v : out)
            CHECK(v == Approx(2.0).epsilon(1e-9));
        CHECK(T.entry(0, 1) == Approx(-1.0 / (g.h() * g.h())));
        CHECK(T.entry(0, 2) == 0.0);
    }

    // Smallest eigenvalue of the n = 1023 stencil against a dense tridiagonal eigensolve.
    const std::size_t n = 1023;
    const Grid g = Grid::build(0.0, 1.0, n);
    const TridiagonalMatrix T = assemble_local(g);
    Eigen::VectorXd d(n), e(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = T.diagonal()[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
        e[i] = T.off_diagonal()[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    const double h = g.h();
    const double closed = 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h));
    // eigensolver accuracy is eps ||T|| in absolute terms
    const double slack = 64 * std::numeric_limits<double>::epsilon() * 4 / (h * h);
    CHECK(std::abs(es.eigenvalues()[0] - closed) <= slack);
    CHECK(std::abs(closed - std::numbers::pi * std::numbers::pi) <= 1e-4 * closed);
}

TEST_CASE("thomas solve")
{
    std::mt19937_64 rng(1);
    const Grid g = Grid::build(0.0, 3.0, 50);
    const TridiagonalMatrix T = assemble_local(g);
    const GridFunction v = random_sine_field(g, rng);
    std::vector<double> f(50);
    T.apply(v.values(), f);
    const auto x = T.solve(f);
    CHECK(max_rel_diff(x, v.values()) <= 1e-12);
}

TEST_CASE("interpolation error constant frozen against extended precision")
{
    // Reference values computed independently in 30-digit arithmetic.
    const std::vector<std::pair<double, double>> ref{{0.05, 1.66394921137}, {0.1, 0.83039402643},
                                                      {0.25, 0.32975646649}, {0.5, 0.16212293359},
                                                      {0.75, 0.10572130984}, {0.9, 0.08675220015}};
    for (const auto& [s, m] : ref) {
        CHECK(interpolation_error_constant(s) == Approx(m).epsilon(1e-10));
        CHECK(oracle::interpolation_error_constant(s) == Approx(m).epsilon(1e-10));
    }
}

TEST_CASE("hat kernel weights match adaptive quadrature")
{
    using boost::math::quadrature::gauss_kronrod;
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto w = hat_kernel_weights(s, 60);
        REQUIRE(w.size() == 61);
        CHECK(w[0] == 0.0);
        auto kern = [s](double t) { return std::pow(t, -1.0 - 2.0 * s); };
        const double w1 = gauss_kronrod<double, 61>::integrate([&](double t) { return (2 - t) * kern(t); }, 1, 2, 0,
                                                                1e-15);
        CHECK(w[1] == Approx(w1).epsilon(1e-12));
        for (int k : {2, 3, 7, 29, 30, 31, 60}) {
            auto hat = [&](double t) { return (1.0 - std::abs(t - k)) * kern(t); };
            const double ref = gauss_kronrod<double, 61>::integrate(hat, k - 1.0, k, 0, 1e-15) +
                               gauss_kronrod<double, 61>::integrate(hat, k, k + 1.0, 0, 1e-15);
            CHECK(w[k] == Approx(ref).epsilon(1e-11));
        }
    }
}

TEST_CASE("fractional matrix structure")
{
    for (double sv : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const FractionalOrder s(sv);
        for (std::size_t n : {1u, 2u, 5u, 64u, 255u}) {
            const Grid g = Grid::build(-1.0, 2.0, n);
            const FractionalMatrix A = assemble_fractional(g, s);
            double asym = 0.0, max_off = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double off = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    asym = std::max(asym, std::abs(A.entry(i, j) - A.entry(j, i)));
                    if (i != j) {
                        max_off = std::max(max_off, A.entry(i, j));
                        off += std::abs(A.entry(i, j));
                    }
                }
                CHECK(A.entry(i, i) > off);
            }
            CHECK(asym == 0.0);
            if (n > 1)
                CHECK(max_off <= 0.0);

            // Row sums equal the exterior tail mass.
            std::vector<double> one(n, 1.0), row(n);
            A.apply(one, row);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = g.node(i);
                const double tail =
                    oracle::c_s(sv) * (std::pow(x + 1.0, -2 * sv) + std::pow(2.0 - x, -2 * sv)) / (2 * sv);
                CHECK(row[i] > 0.0);
                CHECK(rel(row[i], tail) <= 1e-10);
            }
        }
    }
}

TEST_CASE("fractional apply matches the quadrature oracle on the bubble profile")
{
    for (double sv : {0.25, 0.5, 0.75}) {
        const std::size_t n = 1023;
        const Grid g = Grid::build(-1.0, 1.0, n);
        const FractionalMatrix A = assemble_fractional(g, FractionalOrder(sv));
        const GridFunction u =
            GridFunction::sample(g, [sv](double x) { return std::pow(std::max(0.0, 1 - x * x), 1 + sv); });
        std::vector<double> au(n);
        A.apply(u.values(), au);
        for (std::size_t i = n / 2 - 2; i <= n / 2 + 2; ++i) {
            const double ref = oracle::fractional_laplacian_power(sv, 1 + sv, g.node(i));
            CHECK(ref == Approx(oracle::bubble(sv, g.node(i))).epsilon(1e-12));
            CHECK(rel(au[i], ref) <= 1e-3);
        }
    }
}

TEST_CASE("fractional consistency order on a smooth profile")
{
    // (1-x^2)_+^3: max error at central nodes shrinks with order >= min(2-2s, 1) - 0.1.
    for (double sv : {0.25, 0.5, 0.75}) {
        std::vector<double> errs;
        for (std::size_t n : {127u, 255u, 511u}) {
            const Grid g = Grid::build(-1.0, 1.0, n);
            const FractionalMatrix A = assemble_fractional(g, FractionalOrder(sv));
            const GridFunction u =
                GridFunction::sample(g, [](double x) { return std::pow(std::max(0.0, 1 - x * x), 3); });
            std::vector<double> au(n);
            A.apply(u.values(), au);
            double e = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(g.node(i)) > 0.5)
                    continue;
                e = std::max(e, std::abs(au[i] - oracle::fractional_laplacian_power(sv, 3.0, g.node(i))));
            }
            errs.push_back(e);
        }
        const double expected = std::min(2.0 - 2.0 * sv, 1.0) - 0.1;
        for (std::size_t l = 1; l < errs.size(); ++l) {
            const double order = std::log2(errs[l - 1] / errs[l]);
            INFO("s=" << sv << " level " << l << " order " << order);
            CHECK(order >= expected);
        }
    }
}

TEST_CASE("mixed operator")
{
    std::mt19937_64 rng(2);
    const Grid g = Grid::build(0.0, 1.0, 200);
    const FractionalOrder s(0.5);
    const MixedOperator A0 = assemble_mixed(g, s, 0.0);
    const MixedOperator A1 = A0.with_t(1.0);
    const GridFunction u = random_sine_field(g, rng);
    const GridFunction v = random_sine_field(g, rng);

    // t = 0 is exactly the local stencil.
    std::vector<double> loc(g.n());
    A0.local().apply(u.values(), loc);
    const GridFunction a0u = A0.apply(u);
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(a0u[i] == loc[i]);

    // t = 1 on x(1-x): 2 + A_frac u.
    const GridFunction q = GridFunction::sample(g, [](double x) { return x * (1 - x); });
    std::vector<double> fq(g.n());
    A1.fractional().apply(q.values(), fq);
    const GridFunction a1q = A1.apply(q);
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(a1q[i] == Approx(2.0 + fq[i]).epsilon(1e-9));

    CHECK(max_abs(A1.apply(GridFunction(g)).values()) == 0.0);

    const GridFunction lhs = A1.apply(2.0 * u - 3.0 * v);
    const GridFunction rhs = 2.0 * A1.apply(u) - 3.0 * A1.apply(v);
    CHECK(max_rel_diff(lhs.values(), rhs.values()) <= 1e-12);

    for (int k = 0; k < 100; ++k) {
        const GridFunction a = random_sine_field(g, rng);
        const GridFunction b = random_sine_field(g, rng);
        const double uav = dot(a.values(), A1.apply(b).values());
        const double vau = dot(b.values(), A1.apply(a).values());
        CHECK(std::abs(uav - vau) <= 1e-10 * std::abs(uav));
    }

    CHECK_THROWS_AS(assemble_mixed(g, s, 1.5), InvalidArgument);
    CHECK_THROWS_AS(assemble_mixed(g, s, -0.1), InvalidArgument);
    CHECK_THROWS_AS(A1.apply(GridFunction(Grid::build(0.0, 1.0, 10))), InvalidArgument);
}

TEST_CASE("mixed operator entries and monotone energy")
{
    std::mt19937_64 rng(4);
    const Grid g = Grid::build(0.0, 2.0, 150);
    const MixedOperator base = assemble_mixed(g, FractionalOrder(0.3), 0.0);
    for (double t : {0.0, 0.3, 1.0}) {
        const MixedOperator A = base.with_t(t);
        for (std::size_t i = 0; i < g.n(); ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < g.n(); ++j)
                if (j != i) {
                    CHECK(A.entry(i, j) <= 0.0);
                    off += std::abs(A.entry(i, j));
                }
            // t = 0 is the plain Laplacian: weak dominance, strict at the ends
            if (t > 0.0 || i == 0 || i + 1 == g.n())
                CHECK(A.diagonal(i) > off);
            else
                CHECK(A.diagonal(i) >= off * (1 - 1e-14));
        }
    }
    for (int k = 0; k < 20; ++k) {
        const GridFunction u = random_sine_field(g, rng);
        double prev = -1.0;
        for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
            const double e = base.with_t(t).energy(u);
            CHECK(e >= prev);
            prev = e;
        }
    }
}

TEST_CASE("quadratic form of the nonlocal part matches the seminorm")
{
    std::mt19937_64 rng(8);
    const Grid g = Grid::build(0.0, 1.0, 511);
    const FractionalOrder s(0.5);
    const MixedOperator A = assemble_mixed(g, s, 1.0);
    for (int k = 0; k < 10; ++k) {
        const GridFunction u = random_sine_field(g, rng);
        const double form = A.energy(u) - A.with_t(0.0).energy(u);
        const double ref = 0.5 * s.c_s() * gagliardo_seminorm_sq(u, s);
        CHECK(rel(form, ref) <= 0.02);
        CHECK(A.with_t(0.0).energy(u) == Approx(gradient_norm_sq(u)).epsilon(1e-12));
    }
}

TEST_CASE("dense copy and matrix dump")
{
    const Grid g = Grid::build(0.0, 1.0, 12);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.4), 0.5);
    const auto d = A.dense();
    REQUIRE(d.size() == 144);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j)
            CHECK(d[i * 12 + j] == A.entry(i, j));

    std::ostringstream band, full;
    write_matrix_dump(band, A);
    write_matrix_dump(full, A, true);
    std::size_t band_rows = 0, full_rows = 0, tail_rows = 0;
    std::istringstream bs(band.str()), fs(full.str());
    std::string line;
    std::getline(bs, line);
    CHECK(line == "i,j,value");
    while (std::getline(bs, line)) {
        ++band_rows;
        tail_rows += line.find(",tail,") != std::string::npos;
    }
    std::getline(fs, line);
    while (std::getline(fs, line))
        ++full_rows;
    std::size_t expect_band = 0;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
            expect_band += std::abs(i - j) <= 5;
    CHECK(tail_rows == 12);
    CHECK(band_rows == expect_band + 12);
    CHECK(full_rows == 144);
}
