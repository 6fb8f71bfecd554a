#ifndef MIXLAB_SOLVER_HPP
#define MIXLAB_SOLVER_HPP

#include "mixlab/grid.hpp"
#include "mixlab/mixed_operator.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mixlab {

struct SolveConfig {
    double cg_tol = 1e-10;           ///< relative residual ||f - Au|| / ||f||
    std::size_t cg_max_iter = 0;     ///< 0 means 10 * n
    double picard_damping = 0.7;     ///< omega in (0, 1]
    double picard_tol = 1e-8;        ///< relative sup-norm residual
    std::size_t picard_max_iter = 500;
    double newton_switch_tol = 1e-3; ///< Picard residual below which Newton takes over
    bool use_newton = false;

    /// Throws InvalidArgument on nonpositive tolerances or damping outside (0, 1].
    void validate() const;
    std::size_t cg_iterations_for(std::size_t n) const noexcept
    {
        return cg_max_iter == 0 ? 10 * n : cg_max_iter;
    }
};

/// Called after every CG iteration with the iteration index and current iterate.
using CgObserver = std::function<void(std::size_t, std::span<const double>)>;

struct LinearSolveResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Symmetric linear map, used so CG can run on A(t) and on Newton Jacobians alike.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Jacobi-preconditioned conjugate gradients. Stops once the true residual
/// satisfies ||r|| <= tol ||b||. A positive operator_norm (an upper bound on
/// ||A||) relaxes this to the attainable level ||r|| <= 8 eps ||A|| ||x|| when
/// that is larger. Throws ConvergenceError when the tolerance is not met within
/// max_iter and NotPositiveDefinite on a nonpositive curvature direction.
LinearSolveResult conjugate_gradient(const LinearMap& apply, std::span<const double> diagonal,
                                     std::span<const double> rhs, double tol, std::size_t max_iter,
                                     std::span<const double> x0 = {},
                                     const CgObserver& observer = {}, double operator_norm = 0.0);

/// Solves A(t) u = f.
GridFunction solve_linear(const MixedOperator& op, const GridFunction& f,
                          const SolveConfig& cfg = {});

LinearSolveResult solve_linear_detailed(const MixedOperator& op, std::span<const double> f,
                                        const SolveConfig& cfg, std::span<const double> x0 = {},
                                        const CgObserver& observer = {});

/// Right-hand side g(x, u) of the semilinear problem, with an optional
/// derivative in u for Newton steps (central differences otherwise).
struct Nonlinearity {
    std::function<double(double, double)> value;
    std::function<double(double, double)> du;
    /// g(x, u) = f(x): the solver performs a single linear solve.
    bool u_independent = false;

    static Nonlinearity from(std::function<double(double, double)> g) { return {std::move(g), {}, false}; }
    double derivative(double x, double u) const;
};

enum class SemilinearStatus { converged, max_iterations, diverged };

std::string_view to_string(SemilinearStatus s) noexcept;

struct SemilinearResult {
    GridFunction u;
    double residual_sup = 0.0;       ///< ||Au - g(.,u)||_inf / (1 + ||g(.,u)||_inf)
    std::size_t iterations = 0;
    bool converged = false;
    SemilinearStatus status = SemilinearStatus::max_iterations;
    std::vector<double> history;     ///< residual_sup per iteration
    std::vector<std::string> events; ///< e.g. Newton fallbacks
};

/// Damped Picard iteration u <- (1-w) u + w A^{-1} g(., u), with optional
/// Newton steps once the residual drops below cfg.newton_switch_tol.
/// The initial guess defaults to zero. A u-independent g is solved directly.
SemilinearResult solve_semilinear(const MixedOperator& op, const Nonlinearity& g,
                                  const SolveConfig& cfg = {},
                                  std::optional<GridFunction> initial = std::nullopt);

/// Discrete residual vector A u - g(., u).
std::vector<double> semilinear_residual(const MixedOperator& op, const Nonlinearity& g,
                                        const GridFunction& u);

/// Solves A(t) u = f for each t, warm-starting from the previous solution.
/// Failures are rethrown as ConvergenceError with op "continuation_solve t=<t>".
std::vector<GridFunction> continuation_solve(const Grid& grid, const FractionalOrder& s,
                                             const GridFunction& f,
                                             std::span<const double> t_values,
                                             const SolveConfig& cfg = {});

struct ResonanceReport {
    bool non_unique = false;
    double relative_difference = 0.0; ///< sup|u1 - u2| / max(sup|u1|, sup|u2|)
    SemilinearResult first;
    SemilinearResult second;
};

/// Runs the semilinear solver from `initial` and from `scale * initial`; two
/// converged answers further apart than `threshold` (relative sup norm) mark the
/// problem as non-unique/resonant.
ResonanceReport detect_resonance(const MixedOperator& op, const Nonlinearity& g,
                                 const GridFunction& initial, const SolveConfig& cfg = {},
                                 double scale = 2.0, double threshold = 1e-3);

} // namespace mixlab

#endif // MIXLAB_SOLVER_HPP
