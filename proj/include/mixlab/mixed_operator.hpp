#ifndef MIXLAB_MIXED_OPERATOR_HPP
#define MIXLAB_MIXED_OPERATOR_HPP

#include "mixlab/grid.hpp"
#include "mixlab/norms.hpp"

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace mixlab {

/// Symmetric tridiagonal matrix; used for the 3-point -Laplacian.
class TridiagonalMatrix {
public:
    TridiagonalMatrix(std::vector<double> diag, std::vector<double> off);

    std::size_t size() const noexcept { return diag_.size(); }
    std::span<const double> diagonal() const noexcept { return diag_; }
    std::span<const double> off_diagonal() const noexcept { return off_; }
    double entry(std::size_t i, std::size_t j) const noexcept;

    void apply(std::span<const double> u, std::span<double> out) const noexcept;
    /// Solves T x = rhs by the Thomas algorithm (T must be nonsingular).
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    std::vector<double> diag_;
    std::vector<double> off_;
};

/// Discrete (-Delta)^s on a uniform grid with zero exterior data.
///
/// Row i reads
///   (A u)_i = sum_{j != i} W_{|i-j|} (u_i - u_j) + T_i u_i,
/// with Toeplitz pair weights W_k > 0 and the analytic exterior tail
///   T_i = c_s ((x_i - a)^{-2s} + (b - x_i)^{-2s}) / (2s).
/// Only the weight sequence and the diagonal are stored; the matrix is dense.
class FractionalMatrix {
public:
    FractionalMatrix(std::vector<double> pair_weights, std::vector<double> tails);

    std::size_t size() const noexcept { return tails_.size(); }
    /// W_k for k = 0..n-1 (W_0 = 0).
    std::span<const double> pair_weights() const noexcept { return weights_; }
    std::span<const double> tails() const noexcept { return tails_; }
    std::span<const double> diagonal() const noexcept { return diag_; }
    double entry(std::size_t i, std::size_t j) const noexcept;

    void apply(std::span<const double> u, std::span<double> out) const;
    /// Row-major n x n copy.
    std::vector<double> dense() const;

private:
    std::vector<double> weights_;
    std::vector<double> tails_;
    std::vector<double> diag_;
};

TridiagonalMatrix assemble_local(const Grid& grid);
FractionalMatrix assemble_fractional(const Grid& grid, const FractionalOrder& s);

/// Dimensionless far-field pair weights w_k = h^{2s} * integral of the hat
/// function centred at k*h against z^{-1-2s} over |z| >= h, for k = 1..count.
std::vector<double> hat_kernel_weights(double s, std::size_t count);

/// sum over cells k >= 1 of the integral of (t-k)(k+1-t) t^{-1-2s} on [k, k+1]:
/// the leading interpolation-error constant of the far-field quadrature.
double interpolation_error_constant(double s);

/// A(t) = A_local + t * A_frac. Both parts are shared between operators that
/// differ only in t, so a continuation sweep assembles them once.
class MixedOperator {
public:
    MixedOperator(const Grid& grid, const FractionalOrder& order, double t,
                  std::shared_ptr<const TridiagonalMatrix> local,
                  std::shared_ptr<const FractionalMatrix> frac);

    const Grid& grid() const noexcept { return grid_; }
    const FractionalOrder& order() const noexcept { return order_; }
    double t() const noexcept { return t_; }
    std::size_t size() const noexcept { return grid_.n(); }
    const TridiagonalMatrix& local() const noexcept { return *local_; }
    const FractionalMatrix& fractional() const noexcept { return *frac_; }

    /// Same grid and parts, different nonlocal weight.
    MixedOperator with_t(double t) const;

    void apply(std::span<const double> u, std::span<double> out) const;
    GridFunction apply(const GridFunction& u) const;

    double entry(std::size_t i, std::size_t j) const noexcept;
    double diagonal(std::size_t i) const noexcept;
    std::vector<double> diagonal() const;
    std::vector<double> dense() const;

    /// h * u^T A u, the discrete energy.
    double energy(const GridFunction& u) const;

private:
    Grid grid_;
    FractionalOrder order_;
    double t_;
    std::shared_ptr<const TridiagonalMatrix> local_;
    std::shared_ptr<const FractionalMatrix> frac_;
};

MixedOperator assemble_mixed(const Grid& grid, const FractionalOrder& s, double t);

/// CSV triplets `i,j,value` (1-based) of A(t): the band |i-j| <= 5 followed by one
/// `i,tail,value` row per node, or every entry when `full` is set.
void write_matrix_dump(std::ostream& os, const MixedOperator& op, bool full = false);

} // namespace mixlab

#endif // MIXLAB_MIXED_OPERATOR_HPP
