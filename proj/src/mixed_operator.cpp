#include "mixlab/mixed_operator.hpp"

#include "mixlab/error.hpp"
#include "mixlab/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mixlab {

// ---------------------------------------------------------------------------
// Tridiagonal part

TridiagonalMatrix::TridiagonalMatrix(std::vector<double> diag, std::vector<double> off)
    : diag_(std::move(diag)), off_(std::move(off))
{
    if (diag_.empty() || off_.size() + 1 != diag_.size())
        throw InvalidArgument("TridiagonalMatrix: off-diagonal must have n-1 entries");
}

double TridiagonalMatrix::entry(std::size_t i, std::size_t j) const noexcept
{
    if (i == j)
        return diag_[i];
    if (i + 1 == j)
        return off_[i];
    if (j + 1 == i)
        return off_[j];
    return 0.0;
}

void TridiagonalMatrix::apply(std::span<const double> u, std::span<double> out) const noexcept
{
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag_[i] * u[i];
        if (i > 0)
            v += off_[i - 1] * u[i - 1];
        if (i + 1 < n)
            v += off_[i] * u[i + 1];
        out[i] = v;
    }
}

std::vector<double> TridiagonalMatrix::solve(std::span<const double> rhs) const
{
    const std::size_t n = diag_.size();
    std::vector<double> c(n, 0.0), d(n, 0.0);
    double denom = diag_[0];
    if (denom == 0.0)
        throw NotPositiveDefinite("TridiagonalMatrix::solve: zero pivot");
    c[0] = n > 1 ? off_[0] / denom : 0.0;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag_[i] - off_[i - 1] * c[i - 1];
        if (denom == 0.0)
            throw NotPositiveDefinite("TridiagonalMatrix::solve: zero pivot");
        c[i] = i + 1 < n ? off_[i] / denom : 0.0;
        d[i] = (rhs[i] - off_[i - 1] * d[i - 1]) / denom;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

TridiagonalMatrix assemble_local(const Grid& grid)
{
    const std::size_t n = grid.n();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    return TridiagonalMatrix(std::vector<double>(n, 2.0 * inv_h2),
                             std::vector<double>(n - 1, -inv_h2));
}

// ---------------------------------------------------------------------------
// Kernel integrals

namespace {

// (e^x - 1)/x, continuous at 0.
double expm1_ratio(double x)
{
    return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x;
}

// G'' = t^{-1-2s}, G(1) = 0, G'(1) = -1/(2s). Written through expm1 so the
// s -> 1/2 limit (G = -log t) is reached without cancellation.
double kernel_antiderivative2(double t, double s)
{
    const double lt = std::log(t);
    return -lt * expm1_ratio((1.0 - 2.0 * s) * lt) / (2.0 * s);
}

// Second difference G(k+1) - 2G(k) + G(k-1) by its Taylor series for large k.
double second_difference_series(double k, double s)
{
    const double a = 1.0 + 2.0 * s;
    const double r = 1.0 / (k * k);
    const double c4 = a * (a + 1.0) / 12.0;
    const double c6 = a * (a + 1.0) * (a + 2.0) * (a + 3.0) / 360.0;
    const double c8 = a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * (a + 5.0) / 20160.0;
    return std::pow(k, -a) * (1.0 + r * (c4 + r * (c6 + r * c8)));
}

// Integral of (t-k)(k+1-t) t^{-1-2s} over [k, k+1], expanded around the cell
// midpoint c: sum_m f^{(2m)}(c)/(2m)! * int_{-1/2}^{1/2} (1/4 - x^2) x^{2m} dx.
double cell_bubble_integral(double k, double s)
{
    const double a = 1.0 + 2.0 * s;
    const double c = k + 0.5;
    const double inv_c2 = 1.0 / (c * c);
    double deriv = std::pow(c, -a); // f^{(2m)}(c) / (2m)!
    double total = 0.0;
    for (int m = 0; m < 60; ++m) {
        const double moment = 2.0 * std::pow(0.5, 2 * m + 2) / ((2.0 * m + 1.0) * (2.0 * m + 3.0));
        const double term = deriv * moment;
        total += term;
        if (std::abs(term) < 1e-18 * std::abs(total))
            break;
        const double j = 2.0 * m;
        deriv *= (a + j) * (a + j + 1.0) / ((j + 1.0) * (j + 2.0)) * inv_c2;
    }
    return total;
}

} // namespace

std::vector<double> hat_kernel_weights(double s, std::size_t count)
{
    std::vector<double> w(count + 1, 0.0);
    if (count == 0)
        return w;
    // The k = 1 hat only contributes its outer half [h, 2h]; [0, h] is the singular cell.
    w[1] = kernel_antiderivative2(2.0, s) + 1.0 / (2.0 * s);
    for (std::size_t k = 2; k <= count; ++k) {
        const double kd = static_cast<double>(k);
        w[k] = k < 30 ? kernel_antiderivative2(kd + 1.0, s) - 2.0 * kernel_antiderivative2(kd, s) +
                            kernel_antiderivative2(kd - 1.0, s)
                      : second_difference_series(kd, s);
    }
    return w;
}

double interpolation_error_constant(double s)
{
    constexpr int cells = 2000;
    CompensatedSum acc;
    for (int k = 1; k <= cells; ++k)
        acc += cell_bubble_integral(k, s);
    // Cells beyond `cells`: midpoint-rule Euler-Maclaurin on the leading two terms,
    // integrated from t = cells + 1.
    const double a = 1.0 + 2.0 * s;
    const double c = cells + 1.0;
    acc += std::pow(c, -2.0 * s) / (12.0 * s);
    acc += -std::pow(c, -a - 1.0) * a / 144.0;
    acc += a * (a + 1.0) / 240.0 * std::pow(c, -a - 1.0) / (a + 1.0);
    return acc.value();
}

// ---------------------------------------------------------------------------
// Fractional part

FractionalMatrix::FractionalMatrix(std::vector<double> pair_weights, std::vector<double> tails)
    : weights_(std::move(pair_weights)), tails_(std::move(tails)), diag_(tails_.size())
{
    const std::size_t n = tails_.size();
    if (n == 0 || weights_.size() != n)
        throw InvalidArgument("FractionalMatrix: need n pair weights (W_0..W_{n-1}) and n tails");
    std::vector<double> prefix(n, 0.0); // prefix[m] = W_1 + ... + W_m
    CompensatedSum acc;
    for (std::size_t k = 1; k < n; ++k) {
        acc += weights_[k];
        prefix[k] = acc.value();
    }
    for (std::size_t i = 0; i < n; ++i)
        diag_[i] = prefix[i] + prefix[n - 1 - i] + tails_[i];
}

double FractionalMatrix::entry(std::size_t i, std::size_t j) const noexcept
{
    return i == j ? diag_[i] : -weights_[i > j ? i - j : j - i];
}

void FractionalMatrix::apply(std::span<const double> u, std::span<double> out) const
{
    const std::size_t n = tails_.size();
    const double* w = weights_.data();
    const double* v = u.data();
#ifdef MIXLAB_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_count())
#endif
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double ui = v[i];
        // Four fixed lanes: deterministic and free of a single dependency chain.
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        const std::size_t left = i;          // offsets reaching u_0
        const std::size_t right = n - 1 - i; // offsets reaching u_{n-1}
        std::size_t k = 1;
        for (; k + 3 <= left; k += 4) {
            acc[0] += w[k] * (ui - v[i - k]);
            acc[1] += w[k + 1] * (ui - v[i - k - 1]);
            acc[2] += w[k + 2] * (ui - v[i - k - 2]);
            acc[3] += w[k + 3] * (ui - v[i - k - 3]);
        }
        for (; k <= left; ++k)
            acc[0] += w[k] * (ui - v[i - k]);
        k = 1;
        for (; k + 3 <= right; k += 4) {
            acc[0] += w[k] * (ui - v[i + k]);
            acc[1] += w[k + 1] * (ui - v[i + k + 1]);
            acc[2] += w[k + 2] * (ui - v[i + k + 2]);
            acc[3] += w[k + 3] * (ui - v[i + k + 3]);
        }
        for (; k <= right; ++k)
            acc[0] += w[k] * (ui - v[i + k]);
        out[i] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tails_[i] * ui;
    }
}

std::vector<double> FractionalMatrix::dense() const
{
    const std::size_t n = tails_.size();
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i * n + j] = entry(i, j);
    return m;
}

FractionalMatrix assemble_fractional(const Grid& grid, const FractionalOrder& order)
{
    const std::size_t n = grid.n();
    const double s = order.s();
    const double h = grid.h();
    const double scale = order.c_s() * std::pow(h, -order.two_s());

    // Far field: exact integrals of the piecewise-linear interpolant over |z| >= h.
    std::vector<double> w = hat_kernel_weights(s, n - 1 > 0 ? n - 1 : 0);
    w.resize(n, 0.0);

    // Near field. Over |z| < h the symmetric pairing u(x+z) + u(x-z) - 2u(x) ~ z^2 u''
    // integrates to -u'' h^{2-2s}/(2-2s); the interpolation error of the far field adds
    // +u'' m(s) h^{2-2s}. Both are applied through second differences of u.
    const double sigma = 1.0 / (2.0 - 2.0 * s) - interpolation_error_constant(s);
    if (sigma >= 0.0 || n < 2) {
        if (n >= 2)
            w[1] += sigma;
    } else {
        // Spread a negative coefficient over wider second differences
        // (u_{i+k} + u_{i-k} - 2u_i)/k^2 so every pair weight keeps at least half
        // of its far-field value; off-diagonal entries stay nonpositive.
        double remaining = 1.0;
        for (std::size_t k = 1; k < n && remaining > 0.0; ++k) {
            const double kd = static_cast<double>(k);
            const double cap = 0.5 * w[k] * kd * kd / -sigma;
            const double share = std::min(remaining, cap);
            w[k] += sigma * share / (kd * kd);
            remaining -= share;
        }
    }
    for (double& x : w)
        x *= scale;
    w[0] = 0.0;

    std::vector<double> tails(n);
    const double tail_scale = order.c_s() / order.two_s();
    for (std::size_t i = 0; i < n; ++i) {
        const double left = static_cast<double>(i + 1) * h;
        const double right = static_cast<double>(n - i) * h;
        tails[i] = tail_scale * (std::pow(left, -order.two_s()) + std::pow(right, -order.two_s()));
    }
    return FractionalMatrix(std::move(w), std::move(tails));
}

// ---------------------------------------------------------------------------
// Mixed operator

MixedOperator::MixedOperator(const Grid& grid, const FractionalOrder& order, double t,
                             std::shared_ptr<const TridiagonalMatrix> local,
                             std::shared_ptr<const FractionalMatrix> frac)
    : grid_(grid), order_(order), t_(t), local_(std::move(local)), frac_(std::move(frac))
{
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument(fmt::format("assemble_mixed: t must lie in [0,1], got {}", t));
    if (!local_ || !frac_ || local_->size() != grid.n() || frac_->size() != grid.n())
        throw InvalidArgument("MixedOperator: parts do not match the grid");
}

MixedOperator MixedOperator::with_t(double t) const
{
    return MixedOperator(grid_, order_, t, local_, frac_);
}

void MixedOperator::apply(std::span<const double> u, std::span<double> out) const
{
    const std::size_t n = size();
    if (u.size() != n || out.size() != n)
        throw InvalidArgument("MixedOperator::apply: vector length does not match the grid");
    local_->apply(u, out);
    if (t_ == 0.0)
        return;
    std::vector<double> frac(n);
    frac_->apply(u, frac);
    for (std::size_t i = 0; i < n; ++i)
        out[i] += t_ * frac[i];
}

GridFunction MixedOperator::apply(const GridFunction& u) const
{
    require_same_grid(grid_, u.grid(), "apply");
    GridFunction out(grid_);
    apply(u.values(), out.values());
    return out;
}

double MixedOperator::entry(std::size_t i, std::size_t j) const noexcept
{
    return local_->entry(i, j) + t_ * frac_->entry(i, j);
}

double MixedOperator::diagonal(std::size_t i) const noexcept
{
    return local_->diagonal()[i] + t_ * frac_->diagonal()[i];
}

std::vector<double> MixedOperator::diagonal() const
{
    std::vector<double> d(size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = diagonal(i);
    return d;
}

std::vector<double> MixedOperator::dense() const
{
    const std::size_t n = size();
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i * n + j] = entry(i, j);
    return m;
}

double MixedOperator::energy(const GridFunction& u) const
{
    const GridFunction au = apply(u);
    return grid_.h() * dot(u.values(), au.values());
}

MixedOperator assemble_mixed(const Grid& grid, const FractionalOrder& s, double t)
{
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument(fmt::format("assemble_mixed: t must lie in [0,1], got {}", t));
    return MixedOperator(grid, s, t, std::make_shared<TridiagonalMatrix>(assemble_local(grid)),
                         std::make_shared<FractionalMatrix>(assemble_fractional(grid, s)));
}

void write_matrix_dump(std::ostream& os, const MixedOperator& op, bool full)
{
    const std::size_t n = op.size();
    os << "i,j,value\n";
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = full ? 0 : (i >= 5 ? i - 5 : 0);
        const std::size_t hi = full ? n - 1 : std::min(n - 1, i + 5);
        for (std::size_t j = lo; j <= hi; ++j)
            os << fmt::format("{},{},{:.17g}\n", i + 1, j + 1, op.entry(i, j));
    }
    if (!full)
        for (std::size_t i = 0; i < n; ++i)
            os << fmt::format("{},tail,{:.17g}\n", i + 1, op.t() * op.fractional().tails()[i]);
}

} // namespace mixlab
