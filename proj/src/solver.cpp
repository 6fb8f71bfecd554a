#include "mixlab/solver.hpp"

#include "mixlab/error.hpp"
#include "mixlab/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixlab {

void SolveConfig::validate() const
{
    if (!(cg_tol > 0.0) || !(picard_tol > 0.0) || !(newton_switch_tol > 0.0))
        throw InvalidArgument("solver tolerances must be positive");
    if (!(picard_damping > 0.0 && picard_damping <= 1.0))
        throw InvalidArgument(fmt::format("picard_damping must lie in (0,1], got {}", picard_damping));
    if (picard_max_iter == 0)
        throw InvalidArgument("picard_max_iter must be positive");
}

namespace {

// Scaled so that entries near the overflow threshold stay representable.
double norm2(std::span<const double> v) noexcept
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    if (m == 0.0 || !std::isfinite(m))
        return m;
    double acc = 0.0;
    for (double x : v)
        acc += (x / m) * (x / m);
    return m * std::sqrt(acc);
}

// Gershgorin bound for a diagonally dominant matrix.
double dominant_norm_bound(std::span<const double> diag)
{
    double m = 0.0;
    for (double d : diag)
        m = std::max(m, std::abs(d));
    return 2.0 * m;
}

} // namespace

LinearSolveResult conjugate_gradient(const LinearMap& apply, std::span<const double> diagonal,
                                     std::span<const double> rhs, double tol, std::size_t max_iter,
                                     std::span<const double> x0, const CgObserver& observer,
                                     double operator_norm)
{
    const std::size_t n = rhs.size();
    LinearSolveResult out;
    out.x.assign(n, 0.0);
    if (!x0.empty())
        std::copy(x0.begin(), x0.end(), out.x.begin());

    const double bnorm = norm2(rhs);
    if (!std::isfinite(bnorm))
        throw ConvergenceError("solve_linear", "right-hand side is not finite", bnorm);
    if (bnorm == 0.0) {
        std::fill(out.x.begin(), out.x.end(), 0.0);
        return out;
    }

    std::vector<double> r(n), z(n), p(n), ap(n);
    auto true_residual = [&] {
        apply(out.x, ap);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = rhs[i] - ap[i];
        return norm2(r);
    };
    auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i)
            z[i] = r[i] / diagonal[i];
    };

    // Residuals below eps ||A|| ||x|| are rounding noise and cannot be certified.
    auto threshold = [&] {
        const double floor = operator_norm > 0.0
                                 ? 8.0 * std::numeric_limits<double>::epsilon() * operator_norm * norm2(out.x)
                                 : 0.0;
        return std::max(tol * bnorm, floor);
    };

    double rnorm = true_residual();
    precondition();
    p = z;
    double rz = dot(r, z);
    std::size_t it = 0;
    while (true) {
        if (rnorm <= threshold()) {
            // The recursive residual drifts; only stop on a verified one.
            rnorm = true_residual();
            if (rnorm <= threshold())
                break;
            precondition();
            p = z;
            rz = dot(r, z);
        }
        if (it >= max_iter)
            throw ConvergenceError("solve_linear", "cg did not converge", rnorm / bnorm);
        apply(p, ap);
        const double curvature = dot(p, ap);
        if (!(curvature > 0.0))
            throw NotPositiveDefinite(
                fmt::format("cg: nonpositive curvature {} at iteration {}", curvature, it));
        const double alpha = rz / curvature;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++it;
        if (observer)
            observer(it, out.x);
        rnorm = norm2(r);
        precondition();
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    out.iterations = it;
    out.relative_residual = rnorm / bnorm;
    return out;
}

LinearSolveResult solve_linear_detailed(const MixedOperator& op, std::span<const double> f,
                                        const SolveConfig& cfg, std::span<const double> x0,
                                        const CgObserver& observer)
{
    if (f.size() != op.size())
        throw InvalidArgument("solve_linear: right-hand side does not match the grid");
    const std::vector<double> diag = op.diagonal();
    return conjugate_gradient([&op](std::span<const double> u, std::span<double> out) { op.apply(u, out); },
                              diag, f, cfg.cg_tol, cfg.cg_iterations_for(op.size()), x0, observer,
                              dominant_norm_bound(diag));
}

GridFunction solve_linear(const MixedOperator& op, const GridFunction& f, const SolveConfig& cfg)
{
    require_same_grid(op.grid(), f.grid(), "solve_linear");
    cfg.validate();
    auto res = solve_linear_detailed(op, f.values(), cfg);
    return GridFunction(op.grid(), std::move(res.x));
}

// ---------------------------------------------------------------------------

double Nonlinearity::derivative(double x, double u) const
{
    if (du)
        return du(x, u);
    const double step = 1e-6 * (1.0 + std::abs(u));
    return (value(x, u + step) - value(x, u - step)) / (2.0 * step);
}

std::string_view to_string(SemilinearStatus s) noexcept
{
    switch (s) {
    case SemilinearStatus::converged:
        return "converged";
    case SemilinearStatus::max_iterations:
        return "max_iterations";
    case SemilinearStatus::diverged:
        return "diverged";
    }
    return "unknown";
}

namespace {

std::vector<double> evaluate_g(const Nonlinearity& g, const GridFunction& u)
{
    const Grid& grid = u.grid();
    std::vector<double> out(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) {
        out[i] = g.value(grid.node(i), u[i]);
        if (!std::isfinite(out[i]))
            throw EvaluationError(fmt::format("g(x={}, u={}) is not finite", grid.node(i), u[i]));
    }
    return out;
}

constexpr std::size_t divergence_window = 20;
// CG inner products scale like |g|^2; beyond this they overflow.
constexpr double representable_source = 1e150;

bool is_diverging(const std::vector<double>& history)
{
    if (history.size() <= divergence_window)
        return false;
    for (std::size_t k = history.size() - divergence_window; k < history.size(); ++k)
        if (!(history[k] > history[k - 1]))
            return false;
    return true;
}

// Blow-up without a residual trend: the iterate keeps at least doubling while
// the residual does not even halve.
bool is_blowing_up(const std::vector<double>& sizes, const std::vector<double>& history)
{
    if (sizes.size() <= divergence_window)
        return false;
    const std::size_t first = sizes.size() - divergence_window;
    for (std::size_t k = first; k < sizes.size(); ++k)
        if (!(sizes[k] >= 2.0 * sizes[k - 1]))
            return false;
    return history.back() > 0.5 * history[first - 1];
}

} // namespace

std::vector<double> semilinear_residual(const MixedOperator& op, const Nonlinearity& g,
                                        const GridFunction& u)
{
    require_same_grid(op.grid(), u.grid(), "semilinear_residual");
    std::vector<double> au(op.size());
    op.apply(u.values(), au);
    const auto gv = evaluate_g(g, u);
    for (std::size_t i = 0; i < au.size(); ++i)
        au[i] -= gv[i];
    return au;
}

SemilinearResult solve_semilinear(const MixedOperator& op, const Nonlinearity& g,
                                  const SolveConfig& cfg, std::optional<GridFunction> initial)
{
    cfg.validate();
    const Grid& grid = op.grid();
    const std::size_t n = grid.n();
    SemilinearResult result{initial ? std::move(*initial) : GridFunction(grid), 0.0, 0, false, SemilinearStatus::max_iterations, {}, {}};
    require_same_grid(grid, result.u.grid(), "solve_semilinear");
    GridFunction& u = result.u;

    const std::vector<double> diag = op.diagonal();
    const std::size_t cg_iter = cfg.cg_iterations_for(n);
    auto op_map = [&op](std::span<const double> v, std::span<double> out) { op.apply(v, out); };

    std::vector<double> au(n), picard_target; // A^{-1} g(u) from the previous step
    bool newton_enabled = cfg.use_newton;
    const double a_norm = dominant_norm_bound(diag);
    std::vector<double> sizes; // sup |u| per iteration

    if (g.u_independent) {
        const auto f = evaluate_g(g, u);
        auto res = conjugate_gradient(op_map, diag, f, cfg.cg_tol, cg_iter, u.values(), {}, a_norm);
        std::copy(res.x.begin(), res.x.end(), u.values().begin());
    }

    for (std::size_t k = 0;; ++k) {
        const auto gv = evaluate_g(g, u);
        op.apply(u.values(), au);
        double rmax = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            rmax = std::max(rmax, std::abs(au[i] - gv[i]));
        result.residual_sup = rmax / (1.0 + max_abs(gv));
        result.history.push_back(result.residual_sup);
        sizes.push_back(max_abs(u.values()));
        result.iterations = k;

        if (result.residual_sup <= cfg.picard_tol) {
            result.converged = true;
            result.status = SemilinearStatus::converged;
            return result;
        }
        if (!std::isfinite(result.residual_sup) || !(max_abs(gv) < representable_source) ||
            is_diverging(result.history) ||
            is_blowing_up(sizes, result.history)) {
            result.status = SemilinearStatus::diverged;
            return result;
        }
        if (k >= cfg.picard_max_iter) {
            result.status = SemilinearStatus::max_iterations;
            return result;
        }

        if (newton_enabled && result.residual_sup < cfg.newton_switch_tol) {
            // J = A - diag(dg/du); solve J delta = -(Au - g).
            std::vector<double> dg(n), jdiag(n), rhs(n);
            for (std::size_t i = 0; i < n; ++i) {
                dg[i] = g.derivative(grid.node(i), u[i]);
                jdiag[i] = diag[i] - dg[i];
                rhs[i] = gv[i] - au[i];
            }
            auto jac = [&](std::span<const double> v, std::span<double> out) {
                op.apply(v, out);
                for (std::size_t i = 0; i < n; ++i)
                    out[i] -= dg[i] * v[i];
            };
            try {
                if (std::any_of(jdiag.begin(), jdiag.end(), [](double d) { return !(d > 0.0); }))
                    throw NotPositiveDefinite("Jacobian diagonal is not positive");
                const auto step =
                    conjugate_gradient(jac, jdiag, rhs, cfg.cg_tol, cg_iter, {}, {}, a_norm + max_abs(dg));
                for (std::size_t i = 0; i < n; ++i)
                    u[i] += step.x[i];
                continue;
            } catch (const NotPositiveDefinite& e) {
                result.events.push_back(fmt::format("iter {}: newton fallback to picard ({})", k, e.what()));
                newton_enabled = false;
            } catch (const ConvergenceError& e) {
                result.events.push_back(fmt::format("iter {}: newton fallback to picard ({})", k, e.what()));
                newton_enabled = false;
            }
        }

        auto solve = conjugate_gradient(op_map, diag, gv, cfg.cg_tol, cg_iter, picard_target, {}, a_norm);
        picard_target = std::move(solve.x);
        const double w = cfg.picard_damping;
        for (std::size_t i = 0; i < n; ++i)
            u[i] = (1.0 - w) * u[i] + w * picard_target[i];
    }
}

// ---------------------------------------------------------------------------

std::vector<GridFunction> continuation_solve(const Grid& grid, const FractionalOrder& s,
                                             const GridFunction& f,
                                             std::span<const double> t_values,
                                             const SolveConfig& cfg)
{
    require_same_grid(grid, f.grid(), "continuation_solve");
    cfg.validate();
    if (t_values.empty())
        throw InvalidArgument("continuation_solve: need at least one t value");
    for (std::size_t k = 0; k < t_values.size(); ++k) {
        if (!(t_values[k] >= 0.0 && t_values[k] <= 1.0))
            throw InvalidArgument(fmt::format("continuation_solve: t={} outside [0,1]", t_values[k]));
        if (k > 0 && !(t_values[k] > t_values[k - 1]))
            throw InvalidArgument("continuation_solve: t values must be strictly increasing");
    }

    const MixedOperator base = assemble_mixed(grid, s, t_values.front());
    std::vector<GridFunction> out;
    out.reserve(t_values.size());
    std::vector<double> warm;
    for (double t : t_values) {
        const MixedOperator op = base.with_t(t);
        try {
            auto res = solve_linear_detailed(op, f.values(), cfg, warm);
            warm = res.x;
            out.emplace_back(grid, std::move(res.x));
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(fmt::format("continuation_solve t={}", t), e.reason(), e.residual());
        }
    }
    return out;
}

ResonanceReport detect_resonance(const MixedOperator& op, const Nonlinearity& g,
                                 const GridFunction& initial, const SolveConfig& cfg, double scale,
                                 double threshold)
{
    ResonanceReport rep{false, 0.0, solve_semilinear(op, g, cfg, initial),
                        solve_semilinear(op, g, cfg, scale * initial)};
    const auto a = rep.first.u.values();
    const auto b = rep.second.u.values();
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        diff = std::max(diff, std::abs(a[i] - b[i]));
    const double size = std::max(max_abs(a), max_abs(b));
    rep.relative_difference = size > 0.0 ? diff / size : 0.0;
    const bool settled = rep.first.status != SemilinearStatus::diverged &&
                         rep.second.status != SemilinearStatus::diverged;
    rep.non_unique = settled && rep.relative_difference > threshold;
    return rep;
}

} // namespace mixlab
