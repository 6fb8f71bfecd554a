#ifndef MIXLAB_REGULARITY_HPP
#define MIXLAB_REGULARITY_HPP

#include "mixlab/grid.hpp"
#include "mixlab/norms.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mixlab {

// ---------------------------------------------------------------------------
// Truncated power used to test the equation against phi(u) phi'(u)

struct TruncationParams {
    double beta = 2.0; ///< > 1
    double T = 1.0;    ///< > 0

    void validate() const;
};

struct PhiValue {
    double value;
    double derivative;
};

/// phi(t) = |t|^beta on (-T, T), continued linearly (C^1) outside.
PhiValue truncation_phi(double t, const TruncationParams& p);

/// (phi(a)phi'(a) - phi(b)phi'(b))(a - b) - |phi(a) - phi(b)|^2; nonnegative by convexity.
double convexity_gap(double a, double b, const TruncationParams& p);

/// Lipschitz constant beta T^{beta-1} of phi.
double truncation_lipschitz(const TruncationParams& p);

// ---------------------------------------------------------------------------
// Moser iterates

struct MoserTrace {
    double exponent = 0.0;          ///< 2* (or 2*_s for the sublinear trace)
    std::vector<double> beta;       ///< beta_1, beta_2, ...
    std::vector<double> A;          ///< A_m (B_m for the sublinear trace)
    std::vector<double> step_ratio; ///< A_{m+1} / A_m
    double C0_estimate = 0.0;       ///< max_m A_m / A_1
    bool truncated = false;         ///< stopped early on a non-finite value
};

/// beta_1 = (2*+1)/2, 2 beta_{m+1} + 2* - 2 = 2* beta_m,
/// A_m = (1 + int |u|^{2* beta_m})^{1/(2*(beta_m - 1))}.
MoserTrace moser_trace(const GridFunction& u, double two_star, std::size_t m_max);

/// beta_1 = beta1, 2 beta_{m+1} = 2*_s beta_m, B_m = (1 + int |u|^{2*_s beta_m})^{1/(2*_s beta_m)}.
/// 2*_s = 2/(1-2s) for s < 1/2; for s >= 1/2 it must be supplied.
MoserTrace sublinear_trace(const GridFunction& u, const FractionalOrder& s, std::size_t m_max,
                           std::optional<double> two_star_s = std::nullopt, double beta1 = 2.0);

void write_csv(std::ostream& os, const MoserTrace& trace);

/// 2* = 2n/(n-2) for n > 2, infinity otherwise.
double critical_exponent(int n_dim);
/// 2*_s = 2n/(n-2s) for n > 2s, infinity otherwise.
double fractional_critical_exponent(int n_dim, double s);

// ---------------------------------------------------------------------------
// Exponent windows and regularity probes

struct ExponentWindow {
    double p_min;
    double p_max; ///< may be infinity
};

/// Admissible L^p exponents for W^{2,p} solvability: (1, inf) for s <= 1/2,
/// (n, n/(2s-1)) for s > 1/2.
ExponentWindow w2p_window(double s, int n_dim);

/// [A_frac u]_alpha / (||u||_inf + ||Du||_inf) over all interior node pairs.
double fractional_holder_ratio(const GridFunction& u, const FractionalOrder& s, double alpha);

struct HolderFlag {
    double alpha = 0.0;
    std::vector<double> quotients; ///< one per refinement level
    double max_growth = 0.0;       ///< largest quotient ratio between consecutive levels
    bool pass = false;
};

struct RegularityReport {
    double s = 0.0;
    double fitted_alpha = 0.0;
    double boundary_slope_a = 0.0;
    double boundary_quadratic_b = 0.0;
    double fractional_coefficient = 0.0;
    double r2_linear_model = 0.0;
    double r2_fractional_model = 0.0;
    std::size_t fit_nodes = 0;
    std::vector<HolderFlag> threshold_flags;
};

enum class BoundarySide { left, right };

/// Least squares u ~ a d + b d^2 and u ~ c d^s over nodes with d <= fit_fraction * |b-a|
/// on one side; needs at least 8 nodes in the window.
RegularityReport boundary_fit(const GridFunction& u, double s, double fit_fraction = 0.1,
                              BoundarySide side = BoundarySide::left);

enum class HolderWindow { full, interior };

/// Growth factor per refinement below which a quotient sequence counts as bounded.
inline constexpr double holder_growth_threshold = 1.15;

/// Hoelder quotients of the discrete derivative (forward differences for order 1,
/// second differences for order 2, interior windows only) across >= 3 refinement
/// levels of the same domain. fitted_alpha is the largest alpha whose quotients
/// grow by at most holder_growth_threshold per refinement.
RegularityReport estimate_gradient_holder(std::span<const GridFunction> solutions,
                                          std::span<const double> alpha_grid,
                                          HolderWindow window = HolderWindow::full,
                                          int derivative_order = 1);

/// CSV `alpha,level,quotient,flag`.
void write_csv(std::ostream& os, const RegularityReport& report);
/// Flat `key=value` block.
std::string to_key_value(const RegularityReport& report);

/// Discrete L^p norm of the second difference of u (zero boundary values).
double second_difference_lp_norm(const GridFunction& u, double p);

} // namespace mixlab

#endif // MIXLAB_REGULARITY_HPP
