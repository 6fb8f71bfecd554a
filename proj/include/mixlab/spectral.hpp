#ifndef MIXLAB_SPECTRAL_HPP
#define MIXLAB_SPECTRAL_HPP

#include "mixlab/grid.hpp"
#include "mixlab/mixed_operator.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace mixlab {

/// Principal eigenpair of A(t). phi1 has unit discrete L2 norm and its entry of
/// largest magnitude is positive.
struct EigenPair {
    double lambda1 = 0.0;
    GridFunction phi1;
    double residual = 0.0; ///< ||A phi1 - lambda1 phi1||_2 (discrete L2)
    std::size_t iterations = 0;
};

struct EigenGap {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double residual1 = 0.0;
    double residual2 = 0.0;
    bool dense_fallback = false;
    std::optional<GridFunction> phi1; ///< principal eigenfunction from the first stage

    double gap() const noexcept { return lambda2 - lambda1; }
};

inline constexpr std::size_t eigen_max_iterations = 10000;
/// Largest n for which a dense symmetric eigensolve is attempted.
inline constexpr std::size_t dense_eigen_limit = 1024;

/// Inverse power iteration (CG inner solves, warm-started) with Rayleigh-quotient
/// readout. Stops once the residual is <= tol * lambda1, or <= 32 eps ||A|| when
/// that rounding floor is larger (fine grids with tol near 1e-10); throws
/// ConvergenceError after eigen_max_iterations.
EigenPair principal_eigenpair(const MixedOperator& op, double tol = 1e-10);

/// h u^T A u / (h u^T u). Throws InvalidArgument for u = 0.
double rayleigh_quotient(const MixedOperator& op, const GridFunction& u);

/// Two smallest eigenvalues; lambda2 by inverse iteration deflated against phi1,
/// with a dense fallback for n <= dense_eigen_limit.
EigenGap eigengap(const MixedOperator& op, double tol = 1e-10);

/// All eigenvalues of A(t), ascending, by a dense symmetric solve.
std::vector<double> dense_eigenvalues(const MixedOperator& op);

} // namespace mixlab

#endif // MIXLAB_SPECTRAL_HPP
