#ifndef MIXLAB_NORMS_HPP
#define MIXLAB_NORMS_HPP

#include "mixlab/grid.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace mixlab {

enum class Normalization {
    standard, ///< c_s = 4^s Gamma(1/2+s) / (sqrt(pi) |Gamma(-s)|), the 1-D constant
    unit      ///< c_s = 1
};

std::string_view to_string(Normalization n) noexcept;
Normalization parse_normalization(std::string_view text);

/// Order s of the fractional Laplacian together with its kernel constant.
class FractionalOrder {
public:
    explicit FractionalOrder(double s, Normalization norm = Normalization::standard);

    double s() const noexcept { return s_; }
    double two_s() const noexcept { return 2.0 * s_; }
    double c_s() const noexcept { return c_s_; }
    Normalization normalization() const noexcept { return norm_; }

    /// c_s degenerates as s -> 0 or s -> 1; reports flag orders outside [0.05, 0.95].
    bool near_degenerate() const noexcept { return s_ < 0.05 || s_ > 0.95; }

private:
    double s_;
    double c_s_;
    Normalization norm_;
};

/// Standard 1-D normalization constant of (-Delta)^s.
double standard_constant(double s);

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Midpoint-rule (h * sum |u_i|^p)^(1/p); p = infinity gives max |u_i|.
double lp_norm(const GridFunction& u, double p);

/// [u]_s^2 = double integral over R^2 of (u(x)-u(y))^2 / |x-y|^(1+2s), with u = 0
/// outside (a, b). Interior pairs use the node double sum (diagonal omitted);
/// the interior-exterior part is integrated exactly per node.
double gagliardo_seminorm_sq(const GridFunction& u, const FractionalOrder& s);

/// Forward differences (u_{i+1} - u_i)/h over all n+1 cells, boundary values 0.
std::vector<double> forward_differences(const GridFunction& u);

/// h * sum of squared forward differences, boundary intervals included.
double gradient_norm_sq(const GridFunction& u);

/// ||grad u||^2 + [u]_s^2.
double norm_x01_sq(const GridFunction& u, const FractionalOrder& s);

/// Smallest K with [u]_s^2 <= K ||grad u||^2 for every grid function on `grid`:
/// the largest generalized eigenvalue of the two quadratic forms, by power
/// iteration on (gradient form)^{-1} (Gagliardo form).
double norm_equivalence_constant(const Grid& grid, const FractionalOrder& s, double tol = 1e-12);

/// Inclusive range of 0-based interior node indices.
struct IndexWindow {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t count() const noexcept { return last >= first ? last - first + 1 : 0; }
    static IndexWindow all(const Grid& g) noexcept { return {0, g.n() - 1}; }
};

/// sup over node pairs in the window of |u_i - u_j| / |x_i - x_j|^alpha.
double holder_quotient(const GridFunction& u, double alpha, IndexWindow window);

/// Same sup for raw samples at uniformly spaced positions with spacing h.
double holder_quotient(std::span<const double> values, double h, double alpha,
                       IndexWindow window);

} // namespace mixlab

#endif // MIXLAB_NORMS_HPP
