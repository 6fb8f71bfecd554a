#include "mixlab/norms.hpp"

#include "mixlab/error.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mixlab {

std::string_view to_string(Normalization n) noexcept
{
    return n == Normalization::unit ? "unit" : "standard";
}

Normalization parse_normalization(std::string_view text)
{
    if (text == "standard")
        return Normalization::standard;
    if (text == "unit")
        return Normalization::unit;
    throw InvalidArgument(fmt::format("normalization must be `standard` or `unit`, got `{}`", text));
}

double standard_constant(double s)
{
    return std::pow(4.0, s) * std::tgamma(0.5 + s) /
           (std::sqrt(std::numbers::pi) * std::abs(std::tgamma(-s)));
}

FractionalOrder::FractionalOrder(double s, Normalization norm) : s_(s), c_s_(1.0), norm_(norm)
{
    if (!(s > 0.0 && s < 1.0))
        throw InvalidArgument(fmt::format("fractional order must lie in (0,1), got {}", s));
    if (norm == Normalization::standard)
        c_s_ = standard_constant(s);
}

double lp_norm(const GridFunction& u, double p)
{
    if (std::isnan(p) || p < 1.0)
        throw InvalidArgument(fmt::format("lp_norm: need p >= 1, got {}", p));
    const auto v = u.values();
    if (std::isinf(p))
        return max_abs(v);
    // Scale by the max to keep |u|^p representable for large p.
    const double m = max_abs(v);
    if (m == 0.0)
        return 0.0;
    CompensatedSum acc;
    for (double x : v)
        acc += std::pow(std::abs(x) / m, p);
    return m * std::pow(u.grid().h() * acc.value(), 1.0 / p);
}

double gagliardo_seminorm_sq(const GridFunction& u, const FractionalOrder& s)
{
    const Grid& g = u.grid();
    const std::size_t n = g.n();
    const double h = g.h();
    const double expo = 1.0 + s.two_s();
    const auto v = u.values();

    // The kernel depends only on the node offset k = |i - j|.
    std::vector<double> offset_sum(n, 0.0);
#ifdef MIXLAB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
#endif
    for (std::ptrdiff_t kk = 1; kk < static_cast<std::ptrdiff_t>(n); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        CompensatedSum acc;
        for (std::size_t i = 0; i + k < n; ++i) {
            const double d = v[i] - v[i + k];
            acc += d * d;
        }
        offset_sum[k] = acc.value() * std::pow(static_cast<double>(k) * h, -expo);
    }
    CompensatedSum interior;
    for (std::size_t k = 1; k < n; ++k)
        interior += offset_sum[k];

    CompensatedSum exterior;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = static_cast<double>(i + 1) * h;
        const double right = static_cast<double>(n - i) * h;
        const double tail = (std::pow(left, -s.two_s()) + std::pow(right, -s.two_s())) / s.two_s();
        exterior += v[i] * v[i] * tail;
    }
    // Ordered pairs (i,j) and (j,i) both appear in the double integral; the
    // interior-exterior region appears twice as well (x in, y out and vice versa).
    return 2.0 * h * h * interior.value() + 2.0 * h * exterior.value();
}

std::vector<double> forward_differences(const GridFunction& u)
{
    const std::size_t n = u.size();
    const double h = u.grid().h();
    std::vector<double> d(n + 1);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = (u[i] - prev) / h;
        prev = u[i];
    }
    d[n] = (0.0 - prev) / h;
    return d;
}

double gradient_norm_sq(const GridFunction& u)
{
    CompensatedSum acc;
    for (double d : forward_differences(u))
        acc += d * d;
    return u.grid().h() * acc.value();
}

double norm_x01_sq(const GridFunction& u, const FractionalOrder& s)
{
    return gradient_norm_sq(u) + gagliardo_seminorm_sq(u, s);
}

double norm_equivalence_constant(const Grid& grid, const FractionalOrder& s, double tol)
{
    const std::size_t n = grid.n();
    const double h = grid.h();
    // Gagliardo form as a matrix: pair weights 2h^2 |kh|^{-1-2s}, diagonal tails 2h T_i.
    std::vector<double> weights(n, 0.0), tails(n);
    for (std::size_t k = 1; k < n; ++k)
        weights[k] = 2.0 * h * h * std::pow(static_cast<double>(k) * h, -1.0 - s.two_s());
    for (std::size_t i = 0; i < n; ++i) {
        const double left = static_cast<double>(i + 1) * h;
        const double right = static_cast<double>(n - i) * h;
        tails[i] = 2.0 * h * (std::pow(left, -s.two_s()) + std::pow(right, -s.two_s())) / s.two_s();
    }
    const FractionalMatrix gagliardo(std::move(weights), std::move(tails));
    // h * ||Du||^2 = u^T (h A_local) u.
    const TridiagonalMatrix local = assemble_local(grid);
    std::vector<double> v(n, 1.0), gv(n), tv(n);
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        gagliardo.apply(v, gv);
        local.apply(v, tv);
        const double next = dot(v, gv) / (h * dot(v, tv));
        if (it > 0 && std::abs(next - lambda) <= tol * next)
            return next;
        lambda = next;
        v = local.solve(gv);
        const double scale = 1.0 / std::sqrt(dot(v, v));
        for (double& x : v)
            x *= scale;
    }
    throw ConvergenceError("norm_equivalence_constant", "power iteration did not converge", lambda);
}

double holder_quotient(std::span<const double> values, double h, double alpha, IndexWindow window)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidArgument(fmt::format("holder_quotient: alpha must lie in (0,1], got {}", alpha));
    if (window.count() < 2 || window.last >= values.size())
        throw InvalidArgument(fmt::format("holder_quotient: window [{}, {}] must hold >= 2 of {} nodes",
                                          window.first, window.last, values.size()));
    const std::size_t w = window.count();
    std::vector<double> inv_dist(w);
    for (std::size_t k = 1; k < w; ++k)
        inv_dist[k] = std::pow(static_cast<double>(k) * h, -alpha);

    double best = 0.0;
    for (std::size_t i = window.first; i <= window.last; ++i)
        for (std::size_t j = i + 1; j <= window.last; ++j)
            best = std::max(best, std::abs(values[i] - values[j]) * inv_dist[j - i]);
    return best;
}

double holder_quotient(const GridFunction& u, double alpha, IndexWindow window)
{
    return holder_quotient(u.values(), u.grid().h(), alpha, window);
}

} // namespace mixlab
