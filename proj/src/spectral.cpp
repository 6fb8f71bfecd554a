#include "mixlab/spectral.hpp"

#include "mixlab/error.hpp"
#include "mixlab/norms.hpp"
#include "mixlab/numeric.hpp"
#include "mixlab/solver.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mixlab {

namespace {

struct Iterate {
    double lambda;
    double residual;
};

// Normalizes v to unit discrete L2 norm, then reads off the Rayleigh quotient
// and the residual ||A v - lambda v||_2.
Iterate normalize_and_measure(const MixedOperator& op, std::vector<double>& v, std::vector<double>& av)
{
    const double h = op.grid().h();
    const double scale = 1.0 / std::sqrt(h * dot(v, v));
    for (double& x : v)
        x *= scale;
    op.apply(v, av);
    const double lambda = dot(v, av) / dot(v, v);
    CompensatedSum r;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = av[i] - lambda * v[i];
        r += d * d;
    }
    return {lambda, std::sqrt(h * r.value())};
}

void orthogonalize(std::vector<double>& v, std::span<const double> against)
{
    const double c = dot(v, against) / dot(against, against);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] -= c * against[i];
}

// Upper bound on ||A||_2: the largest absolute row sum, at most twice the
// largest diagonal entry for this M-matrix.
double operator_norm_bound(const MixedOperator& op)
{
    const std::vector<double> d = op.diagonal();
    return 2.0 * *std::max_element(d.begin(), d.end());
}

// Inverse iteration, optionally deflated against `deflate`.
Iterate inverse_iteration(const MixedOperator& op, std::vector<double>& v, double tol,
                          std::span<const double> deflate, std::size_t& iterations)
{
    const std::size_t n = op.size();
    const std::vector<double> diag = op.diagonal();
    auto map = [&op](std::span<const double> x, std::span<double> out) { op.apply(x, out); };
    const double cg_tol = std::max(1e-14, 1e-2 * tol);

    const double norm = operator_norm_bound(op);
    // Applying A to a unit vector carries rounding noise of order eps ||A||;
    // residuals below that level cannot be resolved.
    const double floor = 32.0 * std::numeric_limits<double>::epsilon() * norm;

    std::vector<double> av(n), warm(n);
    if (!deflate.empty())
        orthogonalize(v, deflate);
    Iterate it = normalize_and_measure(op, v, av);
    for (iterations = 0; iterations < eigen_max_iterations; ++iterations) {
        if (it.residual <= std::max(tol * std::abs(it.lambda), floor))
            return it;
        for (std::size_t i = 0; i < n; ++i)
            warm[i] = v[i] / it.lambda;
        auto solve = conjugate_gradient(map, diag, v, cg_tol, 20 * n, warm, {}, norm);
        v = std::move(solve.x);
        if (!deflate.empty())
            orthogonalize(v, deflate);
        it = normalize_and_measure(op, v, av);
    }
    throw ConvergenceError("principal_eigenpair", "inverse iteration did not converge", it.residual);
}

void sign_normalize(std::vector<double>& v)
{
    const auto it = std::max_element(v.begin(), v.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (it != v.end() && *it < 0.0)
        for (double& x : v)
            x = -x;
}

} // namespace

EigenPair principal_eigenpair(const MixedOperator& op, double tol)
{
    if (!(tol > 0.0))
        throw InvalidArgument("principal_eigenpair: tol must be positive");
    // A positive start vector is never orthogonal to the one-signed ground state.
    std::vector<double> v(op.size(), 1.0);
    std::size_t iterations = 0;
    const Iterate it = inverse_iteration(op, v, tol, {}, iterations);
    sign_normalize(v);
    return EigenPair{it.lambda, GridFunction(op.grid(), std::move(v)), it.residual, iterations};
}

double rayleigh_quotient(const MixedOperator& op, const GridFunction& u)
{
    require_same_grid(op.grid(), u.grid(), "rayleigh_quotient");
    const double uu = dot(u.values(), u.values());
    if (uu == 0.0)
        throw InvalidArgument("rayleigh_quotient: zero field");
    std::vector<double> au(op.size());
    op.apply(u.values(), au);
    return dot(u.values(), au) / uu;
}

std::vector<double> dense_eigenvalues(const MixedOperator& op)
{
    const auto n = static_cast<Eigen::Index>(op.size());
    const std::vector<double> dense = op.dense();
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        dense.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("dense_eigenvalues", "dense symmetric eigensolve failed", 0.0);
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

EigenGap eigengap(const MixedOperator& op, double tol)
{
    const std::size_t n = op.size();
    if (n < 2)
        throw InvalidArgument("eigengap: need at least two interior nodes");
    const EigenPair first = principal_eigenpair(op, tol);
    EigenGap out;
    out.lambda1 = first.lambda1;
    out.residual1 = first.residual;
    out.phi1 = first.phi1;

    auto dense_fallback = [&](const std::string& why) {
        if (n > dense_eigen_limit)
            throw ConvergenceError("eigengap", "deflation failed (" + why + ") and n is too large for a dense solve",
                                   out.residual2);
        const auto ev = dense_eigenvalues(op);
        out.lambda1 = ev[0];
        out.lambda2 = ev[1];
        out.dense_fallback = true;
    };

    // Fixed-seed start vector: generic enough to overlap the second eigenvector.
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    std::vector<double> v(n);
    for (double& x : v)
        x = normal(rng);
    try {
        std::size_t iterations = 0;
        const Iterate it = inverse_iteration(op, v, tol, first.phi1.values(), iterations);
        out.lambda2 = it.lambda;
        out.residual2 = it.residual;
        if (!(out.lambda2 > out.lambda1))
            dense_fallback("lambda2 <= lambda1");
    } catch (const ConvergenceError& e) {
        out.residual2 = e.residual();
        dense_fallback(e.what());
    }
    return out;
}

} // namespace mixlab
