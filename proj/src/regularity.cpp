#include "mixlab/regularity.hpp"

#include "mixlab/error.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace mixlab {

void TruncationParams::validate() const
{
    if (!(beta > 1.0) || !(T > 0.0) || !std::isfinite(beta) || !std::isfinite(T))
        throw InvalidArgument(fmt::format("truncation: need beta > 1 and T > 0, got beta={} T={}", beta, T));
}

PhiValue truncation_phi(double t, const TruncationParams& p)
{
    p.validate();
    const double slope = p.beta * std::pow(p.T, p.beta - 1.0);
    const double top = std::pow(p.T, p.beta);
    if (t <= -p.T)
        return {-slope * (t + p.T) + top, -slope};
    if (t >= p.T)
        return {slope * (t - p.T) + top, slope};
    const double at = std::abs(t);
    const double d = p.beta * std::pow(at, p.beta - 1.0);
    return {std::pow(at, p.beta), t < 0.0 ? -d : d};
}

namespace {

struct PhiExtended {
    long double value;
    long double derivative;
};

// truncation_phi in extended precision.
PhiExtended phi_extended(long double t, long double beta, long double T)
{
    const long double slope = beta * std::pow(T, beta - 1.0L);
    const long double top = std::pow(T, beta);
    if (t <= -T)
        return {-slope * (t + T) + top, -slope};
    if (t >= T)
        return {slope * (t - T) + top, slope};
    const long double at = std::abs(t);
    const long double d = beta * std::pow(at, beta - 1.0L);
    return {std::pow(at, beta), t < 0.0L ? -d : d};
}

} // namespace

double convexity_gap(double a, double b, const TruncationParams& p)
{
    p.validate();
    // Both products reach ~1e4 on [-3T, 3T] with beta = 4; the difference is
    // formed in extended precision so rounding stays far below 1e-12.
    const PhiExtended pa = phi_extended(a, p.beta, p.T);
    const PhiExtended pb = phi_extended(b, p.beta, p.T);
    const long double diff = pa.value - pb.value;
    const long double delta = static_cast<long double>(a) - static_cast<long double>(b);
    return static_cast<double>((pa.value * pa.derivative - pb.value * pb.derivative) * delta - diff * diff);
}

double truncation_lipschitz(const TruncationParams& p)
{
    p.validate();
    return p.beta * std::pow(p.T, p.beta - 1.0);
}

// ---------------------------------------------------------------------------

namespace {

// log(1 + h * sum |u_i|^p). Large p goes through log-sum-exp.
double log1p_power_integral(const GridFunction& u, double p)
{
    const double h = u.grid().h();
    if (p <= 200.0) {
        CompensatedSum acc;
        for (double v : u.values())
            acc += std::pow(std::abs(v), p);
        return std::log1p(h * acc.value());
    }
    double peak = -infinity;
    for (double v : u.values())
        if (v != 0.0)
            peak = std::max(peak, p * std::log(std::abs(v)));
    if (peak == -infinity)
        return 0.0;
    CompensatedSum acc;
    for (double v : u.values())
        if (v != 0.0)
            acc += std::exp(p * std::log(std::abs(v)) - peak);
    const double log_integral = std::log(h) + peak + std::log(acc.value());
    // log(1 + e^x) without overflow.
    return std::max(0.0, log_integral) + std::log1p(std::exp(-std::abs(log_integral)));
}

void finish_trace(MoserTrace& trace)
{
    trace.C0_estimate = 0.0;
    trace.step_ratio.clear();
    for (std::size_t m = 0; m < trace.A.size(); ++m) {
        trace.C0_estimate = std::max(trace.C0_estimate, trace.A[m] / trace.A.front());
        if (m + 1 < trace.A.size())
            trace.step_ratio.push_back(trace.A[m + 1] / trace.A[m]);
    }
}

} // namespace

MoserTrace moser_trace(const GridFunction& u, double two_star, std::size_t m_max)
{
    if (!(two_star > 2.0) || !std::isfinite(two_star))
        throw InvalidArgument(fmt::format("moser_trace: need a finite 2* > 2, got {}", two_star));
    if (m_max == 0)
        throw InvalidArgument("moser_trace: m_max must be >= 1");
    MoserTrace trace;
    trace.exponent = two_star;
    double beta = 0.5 * (two_star + 1.0);
    for (std::size_t m = 0; m < m_max; ++m) {
        const double log_a = log1p_power_integral(u, two_star * beta) / (two_star * (beta - 1.0));
        const double a = std::exp(log_a);
        if (!std::isfinite(beta) || !std::isfinite(a)) {
            trace.truncated = true;
            break;
        }
        trace.beta.push_back(beta);
        trace.A.push_back(a);
        beta = 0.5 * (two_star * beta - two_star + 2.0);
    }
    if (trace.A.empty())
        throw InvalidArgument("moser_trace: A_1 is not finite");
    finish_trace(trace);
    return trace;
}

MoserTrace sublinear_trace(const GridFunction& u, const FractionalOrder& s, std::size_t m_max,
                           std::optional<double> two_star_s, double beta1)
{
    double exponent = 0.0;
    if (two_star_s)
        exponent = *two_star_s;
    else if (s.s() < 0.5)
        exponent = 2.0 / (1.0 - 2.0 * s.s());
    else
        throw InvalidArgument("sublinear_trace: 2*_s is infinite for s >= 1/2 in 1-D; supply it explicitly");
    if (!(exponent > 2.0) || !std::isfinite(exponent))
        throw InvalidArgument(fmt::format("sublinear_trace: need a finite 2*_s > 2, got {}", exponent));
    if (!(beta1 >= 2.0))
        throw InvalidArgument("sublinear_trace: beta_1 must be >= 2 in one dimension");
    if (m_max == 0)
        throw InvalidArgument("sublinear_trace: m_max must be >= 1");

    MoserTrace trace;
    trace.exponent = exponent;
    double beta = beta1;
    for (std::size_t m = 0; m < m_max; ++m) {
        const double b = std::exp(log1p_power_integral(u, exponent * beta) / (exponent * beta));
        if (!std::isfinite(beta) || !std::isfinite(b)) {
            trace.truncated = true;
            break;
        }
        trace.beta.push_back(beta);
        trace.A.push_back(b);
        beta = 0.5 * exponent * beta;
    }
    if (trace.A.empty())
        throw InvalidArgument("sublinear_trace: B_1 is not finite");
    finish_trace(trace);
    return trace;
}

void write_csv(std::ostream& os, const MoserTrace& trace)
{
    os << "m,beta,A\n";
    for (std::size_t m = 0; m < trace.A.size(); ++m)
        os << fmt::format("{},{:.17g},{:.17g}\n", m + 1, trace.beta[m], trace.A[m]);
}

double critical_exponent(int n_dim)
{
    if (n_dim < 1)
        throw InvalidArgument("critical_exponent: dimension must be >= 1");
    return n_dim > 2 ? 2.0 * n_dim / (n_dim - 2.0) : infinity;
}

double fractional_critical_exponent(int n_dim, double s)
{
    if (n_dim < 1)
        throw InvalidArgument("fractional_critical_exponent: dimension must be >= 1");
    const double two_s = 2.0 * s;
    return n_dim > two_s ? 2.0 * n_dim / (n_dim - two_s) : infinity;
}

// ---------------------------------------------------------------------------

ExponentWindow w2p_window(double s, int n_dim)
{
    if (!(s > 0.0 && s < 1.0))
        throw InvalidArgument(fmt::format("w2p_window: s must lie in (0,1), got {}", s));
    if (n_dim < 1)
        throw InvalidArgument("w2p_window: dimension must be >= 1");
    if (s <= 0.5)
        return {1.0, infinity};
    const double n = n_dim;
    return {n, n / (2.0 * s - 1.0)};
}

double fractional_holder_ratio(const GridFunction& u, const FractionalOrder& s, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument(fmt::format("fractional_holder_ratio: alpha must lie in (0,1), got {}", alpha));
    const double denom = max_abs(u.values()) + max_abs(forward_differences(u));
    if (denom == 0.0)
        throw InvalidArgument("fractional_holder_ratio: zero field (||u||_inf + ||Du||_inf = 0)");
    const Grid& g = u.grid();
    if (g.n() < 2)
        throw InvalidArgument("fractional_holder_ratio: need at least two nodes");
    const FractionalMatrix frac = assemble_fractional(g, s);
    std::vector<double> au(g.n());
    frac.apply(u.values(), au);
    return holder_quotient(au, g.h(), alpha, IndexWindow::all(g)) / denom;
}

RegularityReport boundary_fit(const GridFunction& u, double s, double fit_fraction, BoundarySide side)
{
    if (!(fit_fraction > 0.0 && fit_fraction <= 0.5))
        throw InvalidArgument(fmt::format("boundary_fit: fit_fraction must lie in (0, 0.5], got {}", fit_fraction));
    const Grid& g = u.grid();
    const double limit = fit_fraction * g.length();
    std::vector<double> d, y;
    for (std::size_t k = 0; k < g.n(); ++k) {
        const double dist = static_cast<double>(k + 1) * g.h();
        if (dist > limit * (1.0 + 1e-12))
            break;
        const std::size_t i = side == BoundarySide::left ? k : g.n() - 1 - k;
        d.push_back(dist);
        y.push_back(u[i]);
    }
    if (d.size() < 8)
        throw InvalidArgument(fmt::format("boundary_fit: window holds {} nodes, need >= 8", d.size()));

    RegularityReport rep;
    rep.s = s;
    rep.fit_nodes = d.size();

    // Normal equations for [d, d^2], columns scaled by the window width.
    CompensatedSum s11, s12, s22, r1, r2_sum, mean;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double x1 = d[k] / limit;
        const double x2 = x1 * x1;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * y[k];
        r2_sum += x2 * y[k];
        mean += y[k];
    }
    const double det = s11.value() * s22.value() - s12.value() * s12.value();
    const double a_scaled = (r1.value() * s22.value() - r2_sum.value() * s12.value()) / det;
    const double b_scaled = (s11.value() * r2_sum.value() - s12.value() * r1.value()) / det;
    rep.boundary_slope_a = a_scaled / limit;
    rep.boundary_quadratic_b = b_scaled / (limit * limit);

    CompensatedSum pf, ff;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double phi = std::pow(d[k], s);
        pf += phi * y[k];
        ff += phi * phi;
    }
    rep.fractional_coefficient = pf.value() / ff.value();

    const double ybar = mean.value() / static_cast<double>(y.size());
    CompensatedSum tot, res_lin, res_frac;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double dy = y[k] - ybar;
        tot += dy * dy;
        const double lin = y[k] - (rep.boundary_slope_a * d[k] + rep.boundary_quadratic_b * d[k] * d[k]);
        res_lin += lin * lin;
        const double fr = y[k] - rep.fractional_coefficient * std::pow(d[k], s);
        res_frac += fr * fr;
    }
    auto r2 = [&](double res) {
        if (tot.value() == 0.0)
            return res == 0.0 ? 1.0 : 0.0;
        return std::clamp(1.0 - res / tot.value(), 0.0, 1.0);
    };
    rep.r2_linear_model = r2(res_lin.value());
    rep.r2_fractional_model = r2(res_frac.value());
    return rep;
}

namespace {

std::vector<double> second_differences(const GridFunction& u)
{
    const std::size_t n = u.size();
    const double inv_h2 = 1.0 / (u.grid().h() * u.grid().h());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i + 1 < n ? u[i + 1] : 0.0;
        out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
    return out;
}

} // namespace

double second_difference_lp_norm(const GridFunction& u, double p)
{
    return lp_norm(GridFunction(u.grid(), second_differences(u)), p);
}

RegularityReport estimate_gradient_holder(std::span<const GridFunction> solutions,
                                          std::span<const double> alpha_grid, HolderWindow window,
                                          int derivative_order)
{
    if (solutions.size() < 3)
        throw InvalidArgument("estimate_gradient_holder: need >= 3 refinement levels");
    if (derivative_order != 1 && derivative_order != 2)
        throw InvalidArgument("estimate_gradient_holder: derivative order must be 1 or 2");
    if (derivative_order == 2 && window != HolderWindow::interior)
        throw InvalidArgument("estimate_gradient_holder: second differences are probed on interior windows only");
    for (std::size_t l = 1; l < solutions.size(); ++l) {
        const Grid& prev = solutions[l - 1].grid();
        const Grid& cur = solutions[l].grid();
        if (prev.a() != cur.a() || prev.b() != cur.b() || !(cur.n() > prev.n()))
            throw InvalidArgument("estimate_gradient_holder: inconsistent grids (need one domain, increasing n)");
    }

    // Derivative samples and their spacing/positions per level.
    struct Level {
        std::vector<double> values;
        double h;
        IndexWindow window;
    };
    std::vector<Level> levels;
    for (const GridFunction& u : solutions) {
        const Grid& g = u.grid();
        Level lv{derivative_order == 1 ? forward_differences(u) : second_differences(u), g.h(), {}};
        // Order 1 samples sit at cell midpoints a + (k + 1/2) h; order 2 at nodes.
        const double offset = derivative_order == 1 ? 0.5 : 1.0;
        lv.window = {0, lv.values.size() - 1};
        if (window == HolderWindow::interior) {
            const double lo = g.a() + 0.25 * g.length();
            const double hi = g.b() - 0.25 * g.length();
            std::size_t first = lv.values.size(), last = 0;
            for (std::size_t k = 0; k < lv.values.size(); ++k) {
                const double x = g.a() + (static_cast<double>(k) + offset) * g.h();
                if (x >= lo && x <= hi) {
                    first = std::min(first, k);
                    last = k;
                }
            }
            lv.window = {first, last};
        }
        levels.push_back(std::move(lv));
    }

    RegularityReport rep;
    rep.fitted_alpha = 0.0;
    for (double alpha : alpha_grid) {
        HolderFlag flag;
        flag.alpha = alpha;
        for (const Level& lv : levels)
            flag.quotients.push_back(holder_quotient(lv.values, lv.h, alpha, lv.window));
        flag.max_growth = 0.0;
        for (std::size_t l = 1; l < flag.quotients.size(); ++l) {
            const double prev = flag.quotients[l - 1];
            const double growth = prev > 0.0 ? flag.quotients[l] / prev : (flag.quotients[l] > 0.0 ? infinity : 1.0);
            flag.max_growth = std::max(flag.max_growth, growth);
        }
        flag.pass = flag.max_growth <= holder_growth_threshold;
        if (flag.pass)
            rep.fitted_alpha = std::max(rep.fitted_alpha, alpha);
        rep.threshold_flags.push_back(std::move(flag));
    }
    return rep;
}

void write_csv(std::ostream& os, const RegularityReport& report)
{
    os << "alpha,level,quotient,flag\n";
    for (const HolderFlag& f : report.threshold_flags)
        for (std::size_t l = 0; l < f.quotients.size(); ++l)
            os << fmt::format("{:.17g},{},{:.17g},{}\n", f.alpha, l, f.quotients[l], f.pass ? "pass" : "fail");
}

std::string to_key_value(const RegularityReport& r)
{
    std::ostringstream os;
    os << fmt::format("s={:.17g}\n", r.s);
    os << fmt::format("fitted_alpha={:.17g}\n", r.fitted_alpha);
    os << fmt::format("boundary_slope_a={:.17g}\n", r.boundary_slope_a);
    os << fmt::format("boundary_quadratic_b={:.17g}\n", r.boundary_quadratic_b);
    os << fmt::format("fractional_coefficient={:.17g}\n", r.fractional_coefficient);
    os << fmt::format("r2_linear_model={:.17g}\n", r.r2_linear_model);
    os << fmt::format("r2_fractional_model={:.17g}\n", r.r2_fractional_model);
    os << fmt::format("fit_nodes={}\n", r.fit_nodes);
    for (const HolderFlag& f : r.threshold_flags)
        os << fmt::format("flag.alpha_{:.6g}={}\n", f.alpha, f.pass ? "pass" : "fail");
    return os.str();
}

} // namespace mixlab
