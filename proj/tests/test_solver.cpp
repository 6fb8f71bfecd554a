#include "doctest.h"
#include "oracles.hpp"

#include "mixlab/error.hpp"
#include "mixlab/experiment.hpp"
#include "mixlab/numeric.hpp"
#include "mixlab/solver.hpp"
#include "mixlab/spectral.hpp"

#include <cmath>
#include <random>

using namespace mixlab;
using doctest::Approx;

namespace {

double sup_diff(const GridFunction& a, const GridFunction& b) { return max_abs((a - b).values()); }

GridFunction constant(const Grid& g, double c) { return GridFunction(g, std::vector<double>(g.n(), c)); }

} // namespace

TEST_CASE("solve_linear inverts apply")
{
    std::mt19937_64 rng(21);
    for (double sv : {0.2, 0.5, 0.8}) {
        const Grid g = Grid::build(0.0, 1.0, 255);
        const MixedOperator A = assemble_mixed(g, FractionalOrder(sv), 1.0);
        const GridFunction v = random_sine_field(g, rng);
        const GridFunction u = solve_linear(A, A.apply(v));
        CHECK(sup_diff(u, v) <= 1e-8);
    }
}

TEST_CASE("pure local solve is exact on the quadratic")
{
    for (std::size_t n : {1u, 3u, 63u, 1023u}) {
        const Grid g = Grid::build(0.0, 1.0, n);
        const MixedOperator A = assemble_mixed(g, FractionalOrder(0.5), 0.0);
        const GridFunction u = solve_linear(A, constant(g, 1.0));
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g.node(i);
            CHECK(u[i] == Approx(x * (1 - x) / 2).epsilon(1e-8));
        }
    }
    const Grid g = Grid::build(0.0, 1.0, 3);
    CHECK(solve_linear(assemble_mixed(g, FractionalOrder(0.5), 0.0), constant(g, 1.0))[1] == Approx(0.125));
}

TEST_CASE("mixed solve against a dense LDLT factorization")
{
    const std::size_t n = 1023;
    const Grid g = Grid::build(0.0, 1.0, n);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.5), 1.0);
    const GridFunction u = solve_linear(A, constant(g, 1.0));
    const auto ref = oracle::ldlt_solve(A.dense(), std::vector<double>(n, 1.0));
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        err = std::max(err, std::abs(u[i] - ref[i]));
    CHECK(err <= 1e-8);
}

TEST_CASE("cg reports non-convergence with the last residual")
{
    const Grid g = Grid::build(0.0, 1.0, 200);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.5), 1.0);
    SolveConfig cfg;
    cfg.cg_max_iter = 3;
    try {
        solve_linear(A, constant(g, 1.0), cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.op() == "solve_linear");
        CHECK(e.residual() > cfg.cg_tol);
        CHECK(failure_line(e.op(), e.reason(), e.residual()).rfind("FAIL solve_linear cg_did_not_converge ", 0) == 0);
    }
    SolveConfig bad;
    bad.cg_tol = -1;
    CHECK_THROWS_AS(solve_linear(A, constant(g, 1.0), bad), InvalidArgument);
    bad = {};
    bad.picard_damping = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("cg error energy norm is nonincreasing")
{
    const Grid g = Grid::build(0.0, 1.0, 127);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.3), 1.0);
    const std::size_t n = g.n();
    const GridFunction f = constant(g, 1.0);
    const auto exact = oracle::ldlt_solve(A.dense(), std::vector<double>(n, 1.0));
    std::vector<double> energies;
    SolveConfig cfg;
    cfg.cg_tol = 1e-12;
    // Unpreconditioned-style check on the preconditioned iteration: the A-norm of the
    // error is monotone for any SPD preconditioner.
    solve_linear_detailed(A, f.values(), cfg, {}, [&](std::size_t, std::span<const double> x) {
        std::vector<double> e(n), ae(n);
        for (std::size_t i = 0; i < n; ++i)
            e[i] = x[i] - exact[i];
        A.apply(e, ae);
        energies.push_back(dot(e, ae));
    });
    REQUIRE(energies.size() > 3);
    for (std::size_t k = 1; k < energies.size(); ++k)
        CHECK(energies[k] <= energies[k - 1] * (1 + 1e-9) + 1e-24);
}

TEST_CASE("semilinear solver")
{
    const Grid g = Grid::build(0.0, 1.0, 255);
    const FractionalOrder s(0.3);
    const MixedOperator A = assemble_mixed(g, s, 1.0);

    SUBCASE("u-independent g reproduces the linear solve")
    {
        const auto f = [](double x, double) { return std::sin(3 * x) + 1.0; };
        Nonlinearity nl = Nonlinearity::from(f);
        nl.u_independent = true;
        const SemilinearResult r = solve_semilinear(A, nl);
        REQUIRE(r.converged);
        CHECK(r.iterations == 0);
        const GridFunction lin = solve_linear(A, GridFunction::sample(g, [](double x) { return std::sin(3 * x) + 1.0; }));
        CHECK(sup_diff(r.u, lin) <= 1e-8 * max_abs(lin.values()));
    }
    SUBCASE("fixed point 1 + u/2 satisfies u = A^{-1}(1 + u/2)")
    {
        const SemilinearResult r = solve_semilinear(A, Nonlinearity::from([](double, double u) { return 1 + u / 2; }));
        REQUIRE(r.converged);
        GridFunction rhs = r.u;
        for (double& v : rhs.values())
            v = 1 + v / 2;
        const GridFunction back = solve_linear(A, rhs);
        CHECK(sup_diff(back, r.u) <= 1e-7 * max_abs(r.u.values()));
        CHECK(r.history.size() == r.iterations + 1);
    }
    SUBCASE("below the principal eigenvalue only the zero solution exists")
    {
        const double lambda1 = principal_eigenpair(A).lambda1;
        const GridFunction start = GridFunction::sample(g, [](double x) { return 5 * x * (1 - x) + 0.1; });
        const SemilinearResult r =
            solve_semilinear(A, Nonlinearity::from([&](double, double u) { return 0.5 * lambda1 * u; }), {}, start);
        REQUIRE(r.converged);
        CHECK(max_abs(r.u.values()) <= 1e-6);
    }
    SUBCASE("newton converges and agrees with picard")
    {
        const auto gfun = [](double, double u) { return 1 + std::sqrt(1 + u * u); };
        SolveConfig nw;
        nw.use_newton = true;
        const SemilinearResult a = solve_semilinear(A, Nonlinearity::from(gfun));
        const SemilinearResult b = solve_semilinear(A, Nonlinearity::from(gfun), nw);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(b.iterations < a.iterations);
        CHECK(sup_diff(a.u, b.u) <= 1e-6 * max_abs(a.u.values()));
    }
    SUBCASE("newton falls back to picard when the jacobian is indefinite")
    {
        // g_u = 1e6 makes A - diag(g_u) indefinite; the root is still reachable by Picard
        // only while g_u is tame, so use a nonlinearity steep just away from the solution.
        const auto gfun = [](double, double u) { return 1.0 + (u > 1.0 ? 1e6 * (u - 1.0) : 0.0); };
        SolveConfig nw;
        nw.use_newton = true;
        nw.newton_switch_tol = 10.0;
        const GridFunction start = constant(g, 2.0);
        const SemilinearResult r = solve_semilinear(A, Nonlinearity::from(gfun), nw, start);
        CHECK_FALSE(r.events.empty());
    }
    SUBCASE("divergence is reported with history")
    {
        const auto gfun = [](double, double u) { return 1.0 + u * u * u; };
        const GridFunction start = constant(g, 50.0);
        try {
            const SemilinearResult r = solve_semilinear(A, Nonlinearity::from(gfun), {}, start);
            CHECK_FALSE(r.converged);
            CHECK(r.status != SemilinearStatus::converged);
            CHECK_FALSE(r.history.empty());
        } catch (const ConvergenceError& e) {
            CHECK_FALSE(e.history().empty());
        } catch (const EvaluationError&) {
            // overflow of u^3 is reported as an evaluation failure, also explicit
        }
    }
}

TEST_CASE("weak form identity against random test functions")
{
    std::mt19937_64 rng(31);
    const Grid g = Grid::build(0.0, 1.0, 255);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.4), 1.0);
    const auto gfun = [](double x, double u) { return 1 + x + std::sqrt(std::abs(u)); };
    const SemilinearResult r = solve_semilinear(A, Nonlinearity::from(gfun));
    REQUIRE(r.converged);
    const GridFunction au = A.apply(r.u);
    for (int k = 0; k < 50; ++k) {
        const GridFunction phi = random_sine_field(g, rng);
        double lhs = 0.0, rhs = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < g.n(); ++i) {
            const double gi = gfun(g.node(i), r.u[i]);
            lhs += g.h() * au[i] * phi[i];
            rhs += g.h() * gi * phi[i];
            scale += g.h() * std::abs(gi * phi[i]);
        }
        CHECK(std::abs(lhs - rhs) <= 1e-6 * scale);
    }
}

TEST_CASE("continuation")
{
    const Grid g = Grid::build(0.0, 1.0, 255);
    const FractionalOrder s(0.5);
    const GridFunction f = constant(g, 1.0);

    const auto only0 = continuation_solve(g, s, f, std::vector<double>{0.0});
    REQUIRE(only0.size() == 1);
    CHECK(sup_diff(only0[0], solve_linear(assemble_mixed(g, s, 0.0), f)) <= 1e-9);

    const auto sweep = continuation_solve(g, s, f, std::vector<double>{0.0, 0.5, 1.0});
    CHECK(max_abs(sweep[0].values()) > max_abs(sweep[1].values()));
    CHECK(max_abs(sweep[1].values()) > max_abs(sweep[2].values()));

    auto max_gap = [&](std::vector<double> ts) {
        const auto u = continuation_solve(g, s, f, ts);
        double m = 0.0;
        for (std::size_t k = 1; k < u.size(); ++k)
            m = std::max(m, sup_diff(u[k], u[k - 1]));
        return m;
    };
    const double ratio = max_gap({0.0, 0.125, 0.25, 0.375, 0.5}) / max_gap({0.0, 0.25, 0.5});
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);

    CHECK_THROWS_AS(continuation_solve(g, s, f, std::vector<double>{0.5, 0.2}), InvalidArgument);
    CHECK_THROWS_AS(continuation_solve(g, s, f, std::vector<double>{0.0, 1.2}), InvalidArgument);
    SolveConfig tiny;
    tiny.cg_max_iter = 2;
    try {
        continuation_solve(g, s, f, std::vector<double>{0.0, 0.5}, tiny);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.op().find("continuation_solve t=") == 0);
    }
}

TEST_CASE("resonance detector")
{
    const Grid g = Grid::build(0.0, 1.0, 127);
    const MixedOperator A = assemble_mixed(g, FractionalOrder(0.5), 1.0);
    const double lambda1 = principal_eigenpair(A).lambda1;
    const GridFunction start = GridFunction::sample(g, [](double x) { return x * (1 - x) * (1 + x); });
    const ResonanceReport res =
        detect_resonance(A, Nonlinearity::from([&](double, double u) { return lambda1 * u; }), start);
    CHECK(res.non_unique);
    CHECK(res.relative_difference > 1e-3);

    const ResonanceReport ok =
        detect_resonance(A, Nonlinearity::from([](double, double u) { return 1 + std::sqrt(std::abs(u)); }), start);
    CHECK_FALSE(ok.non_unique);
}
