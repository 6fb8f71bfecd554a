#include "doctest.h"
#include "oracles.hpp"

#include "mixlab/error.hpp"
#include "mixlab/experiment.hpp"
#include "mixlab/grid.hpp"
#include "mixlab/norms.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace mixlab;
using doctest::Approx;

TEST_CASE("grid construction")
{
    const Grid g1 = Grid::build(0.0, 1.0, 1);
    CHECK(g1.n() == 1);
    CHECK(g1.h() == 0.5);
    CHECK(g1.node(0) == 0.5);

    const Grid g3 = Grid::build(0.0, 1.0, 3);
    CHECK(g3.h() == 0.25);
    CHECK(g3.nodes() == std::vector<double>{0.25, 0.5, 0.75});

    const Grid g7 = Grid::build(-1.0, 1.0, 7);
    CHECK(g7.h() == 0.25);
    CHECK(g7.boundary_distance(0) == 0.25);
    CHECK(g7.boundary_distance(3) == 1.0);

    CHECK_THROWS_AS(Grid::build(1.0, 1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(Grid::build(2.0, 1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(Grid::build(0.0, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(Grid::build(0.0, std::nan(""), 3), InvalidArgument);
}

TEST_CASE("grid function basics")
{
    const Grid g = Grid::build(0.0, 1.0, 3);
    const Grid other = Grid::build(0.0, 2.0, 3);
    GridFunction u(g, {1.0, 2.0, 3.0});
    CHECK(u.evaluate(0.0) == 0.0);
    CHECK(u.evaluate(1.0) == 0.0);
    CHECK(u.evaluate(-5.0) == 0.0);
    CHECK(u.evaluate(0.5) == 2.0);
    CHECK(u.evaluate(0.125) == Approx(0.5));
    CHECK(u.evaluate(0.875) == Approx(1.5));
    CHECK_THROWS_AS(GridFunction(g, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(u += GridFunction(other), InvalidArgument);
    const GridFunction w = 2.0 * u - u;
    CHECK(w[2] == 3.0);
}

TEST_CASE("grid function csv round trip")
{
    const Grid g = Grid::build(-0.5, 2.0, 9);
    const GridFunction u = GridFunction::sample(g, [](double x) { return std::sin(3.0 * x) / 7.0; });
    std::istringstream in(to_csv(u));
    const GridFunction v = read_csv(in);
    CHECK(v.grid().n() == g.n());
    CHECK(v.grid().a() == Approx(g.a()));
    CHECK(v.grid().b() == Approx(g.b()));
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(v[i] == u[i]);
    std::istringstream bad("x,u\n0.1,1\n0.2,1\n0.5,1\n");
    CHECK_THROWS_AS(read_csv(bad), InvalidArgument);
}

TEST_CASE("lp_norm")
{
    for (std::size_t n : {1u, 4u, 100u}) {
        const Grid g = Grid::build(0.0, 1.0, n);
        const GridFunction one(g, std::vector<double>(n, 1.0));
        CHECK(lp_norm(one, 2.0) == Approx(std::sqrt(double(n) / double(n + 1))).epsilon(1e-14));
        CHECK(lp_norm(GridFunction(g), 5.0) == 0.0);
        CHECK(lp_norm(GridFunction(g), infinity) == 0.0);
    }
    // sin(pi x): the reference integral by adaptive quadrature rather than the closed form 1/2.
    const double ref = std::sqrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double x) { return std::pow(std::sin(std::numbers::pi * x), 2); }, 0.0, 1.0, 0, 1e-14));
    CHECK(ref == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
    const Grid g = Grid::build(0.0, 1.0, 1023);
    const GridFunction u = GridFunction::sample(g, [](double x) { return std::sin(std::numbers::pi * x); });
    CHECK(std::abs(lp_norm(u, 2.0) - ref) <= 1e-4);
    CHECK(lp_norm(u, infinity) == Approx(1.0));
    CHECK_THROWS_AS(lp_norm(u, 0.5), InvalidArgument);
}

TEST_CASE("lp_norm properties on random fields")
{
    std::mt19937_64 rng(7);
    const Grid g = Grid::build(0.0, 2.0, 200);
    for (int k = 0; k < 50; ++k) {
        const GridFunction u = random_sine_field(g, rng);
        const GridFunction v = random_sine_field(g, rng);
        for (double p : {1.0, 1.5, 2.0, 4.0, infinity}) {
            CHECK(lp_norm(-3.0 * u, p) == Approx(3.0 * lp_norm(u, p)).epsilon(1e-13));
            CHECK(lp_norm(u + v, p) <= lp_norm(u, p) + lp_norm(v, p) + 1e-12);
        }
    }
}

TEST_CASE("gagliardo seminorm")
{
    const FractionalOrder s(0.5);
    const Grid g3 = Grid::build(0.0, 1.0, 3);
    CHECK(gagliardo_seminorm_sq(GridFunction(g3), s) == 0.0);

    const GridFunction spike(g3, {0.0, 1.0, 0.0});
    const double ref = oracle::gagliardo_brute_force({0.0, 1.0, 0.0}, 0.0, 1.0, 0.5);
    // explicit hand value: h^2 * 2 * 2 * h^{-2} + 2 h * (x2^{-1} + (1-x2)^{-1})
    CHECK(ref == Approx(4.0 + 2.0 * 0.25 * 4.0));
    CHECK(gagliardo_seminorm_sq(spike, s) == Approx(ref).epsilon(1e-14));

    std::mt19937_64 rng(3);
    for (double sv : {0.1, 0.3, 0.5, 0.8}) {
        const Grid g = Grid::build(-1.0, 2.0, 40);
        const GridFunction u = random_sine_field(g, rng);
        std::vector<double> vals(u.values().begin(), u.values().end());
        CHECK(gagliardo_seminorm_sq(u, FractionalOrder(sv)) ==
              Approx(oracle::gagliardo_brute_force(vals, -1.0, 2.0, sv)).epsilon(1e-12));
    }
}

TEST_CASE("x01 norm and gradient")
{
    const Grid g = Grid::build(0.0, 1.0, 9);
    const FractionalOrder s(0.3);
    CHECK(norm_x01_sq(GridFunction(g), s) == 0.0);
    const GridFunction u = GridFunction::sample(g, [](double x) { return x * (1 - x); });
    CHECK(norm_x01_sq(u, s) == Approx(gradient_norm_sq(u) + gagliardo_seminorm_sq(u, s)));
    const auto d = forward_differences(u);
    REQUIRE(d.size() == 10);
    CHECK(d.front() == Approx(0.9));
    CHECK(d.back() == Approx(-0.9));
}

TEST_CASE("holder quotient")
{
    const Grid g = Grid::build(0.0, 1.0, 64);
    const auto all = IndexWindow::all(g);
    CHECK(holder_quotient(GridFunction(g, std::vector<double>(64, 3.0)), 0.5, all) == 0.0);
    CHECK(holder_quotient(GridFunction::sample(g, [](double x) { return x; }), 1.0, all) == Approx(1.0));

    // sqrt(x): the C^{0,1/2} quotient is bounded by 1 and matches a pairwise sweep,
    // alpha = 0.9 blows up.
    std::vector<double> q5, q9, ref5;
    for (std::size_t n : {255u, 511u, 1023u}) {
        const Grid gg = Grid::build(0.0, 1.0, n);
        const GridFunction r = GridFunction::sample(gg, [](double x) { return std::sqrt(x); });
        q5.push_back(holder_quotient(r, 0.5, IndexWindow::all(gg)));
        q9.push_back(holder_quotient(r, 0.9, IndexWindow::all(gg)));
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double xi = gg.node(i), xj = gg.node(j);
                best = std::max(best, (std::sqrt(xj) - std::sqrt(xi)) / std::sqrt(xj - xi));
            }
        ref5.push_back(best);
    }
    for (std::size_t k = 0; k < q5.size(); ++k) {
        CHECK(q5[k] == Approx(ref5[k]).epsilon(1e-12));
        CHECK(q5[k] <= 1.0);
    }
    CHECK(q5[2] > q5[1]);
    CHECK(q9[1] / q9[0] > 1.2);
    CHECK(q9[2] / q9[1] > 1.2);

    // Raw-sample overload agrees with a direct double loop.
    std::mt19937_64 rng(11);
    const GridFunction w = random_sine_field(g, rng);
    double ref = 0.0;
    for (std::size_t i = 5; i <= 40; ++i)
        for (std::size_t j = i + 1; j <= 40; ++j)
            ref = std::max(ref, std::abs(w[i] - w[j]) / std::pow((j - i) * g.h(), 0.7));
    CHECK(holder_quotient(w, 0.7, {5, 40}) == Approx(ref).epsilon(1e-14));
    CHECK(holder_quotient(w.values(), g.h(), 0.7, {5, 40}) == Approx(ref).epsilon(1e-14));
    CHECK_THROWS_AS(holder_quotient(w, 1.5, all), InvalidArgument);
}

TEST_CASE("fractional order and normalization")
{
    for (double s : {0.05, 0.25, 0.5, 0.75, 0.95})
        CHECK(standard_constant(s) == Approx(oracle::c_s(s)).epsilon(1e-14));
    CHECK(standard_constant(0.5) == Approx(1.0 / std::numbers::pi));
    CHECK(FractionalOrder(0.3, Normalization::unit).c_s() == 1.0);
    CHECK(FractionalOrder(0.01).near_degenerate());
    CHECK_FALSE(FractionalOrder(0.5).near_degenerate());
    CHECK_THROWS_AS(FractionalOrder(0.0), InvalidArgument);
    CHECK_THROWS_AS(FractionalOrder(1.0), InvalidArgument);
    CHECK(parse_normalization("unit") == Normalization::unit);
    CHECK(to_string(Normalization::standard) == "standard");
    CHECK_THROWS_AS(parse_normalization("weird"), InvalidArgument);
}

TEST_CASE("norm equivalence constant bounds every field")
{
    std::mt19937_64 rng(5);
    const Grid g = Grid::build(0.0, 1.0, 127);
    const FractionalOrder s(0.4);
    const double K = norm_equivalence_constant(g, s);
    CHECK(K > 0.0);
    for (int k = 0; k < 200; ++k) {
        const GridFunction u = random_sine_field(g, rng);
        CHECK(gagliardo_seminorm_sq(u, s) <= K * gradient_norm_sq(u) * (1 + 1e-10));
    }
    // iid noise probes the whole spectrum, not only smooth fields.
    std::normal_distribution<double> z;
    for (int k = 0; k < 50; ++k) {
        GridFunction u(g);
        for (double& v : u.values())
            v = z(rng);
        CHECK(gagliardo_seminorm_sq(u, s) <= K * gradient_norm_sq(u) * (1 + 1e-10));
    }
}
