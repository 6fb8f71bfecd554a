#include "mixlab/experiment.hpp"

#include "mixlab/error.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/numeric.hpp"
#include "mixlab/regularity.hpp"
#include "mixlab/spectral.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

namespace mixlab {

namespace {

std::string_view trim(std::string_view v)
{
    const auto first = v.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = v.find_last_not_of(" \t\r\n");
    return v.substr(first, last - first + 1);
}

double parse_real(std::string_view key, std::string_view text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw InvalidArgument(fmt::format("config: {} expects a real number, got '{}'", key, text));
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument(fmt::format("config: {} expects a nonnegative integer, got '{}'", key, text));
    return v;
}

bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "1" || text == "true" || text == "yes" || text == "on")
        return true;
    if (text == "0" || text == "false" || text == "no" || text == "off")
        return false;
    throw InvalidArgument(fmt::format("config: {} expects a boolean, got '{}'", key, text));
}

} // namespace

void ExperimentConfig::set(std::string_view key, std::string_view raw)
{
    const std::string_view value = trim(raw);
    if (key == "a")
        a = parse_real(key, value);
    else if (key == "b")
        b = parse_real(key, value);
    else if (key == "n")
        n = parse_unsigned(key, value);
    else if (key == "s")
        s = parse_real(key, value);
    else if (key == "t")
        t = parse_real(key, value);
    else if (key == "normalization")
        normalization = parse_normalization(value);
    else if (key == "g" || key == "f")
        g = std::string(value);
    else if (key == "suite")
        suite = std::string(value);
    else if (key == "output_dir")
        output_dir = std::string(value);
    else if (key == "seed")
        seed = parse_unsigned(key, value);
    else if (key == "cg_tol")
        solver.cg_tol = parse_real(key, value);
    else if (key == "cg_max_iter")
        solver.cg_max_iter = parse_unsigned(key, value);
    else if (key == "picard_damping")
        solver.picard_damping = parse_real(key, value);
    else if (key == "picard_tol")
        solver.picard_tol = parse_real(key, value);
    else if (key == "picard_max_iter")
        solver.picard_max_iter = parse_unsigned(key, value);
    else if (key == "newton_switch_tol")
        solver.newton_switch_tol = parse_real(key, value);
    else if (key == "use_newton")
        solver.use_newton = parse_bool(key, value);
    else if (key == "two_star")
        two_star = parse_real(key, value);
    else if (key == "two_star_s")
        two_star_s = parse_real(key, value);
    else if (key == "m_max")
        m_max = parse_unsigned(key, value);
    else if (key == "fit_fraction")
        fit_fraction = parse_real(key, value);
    else
        throw InvalidArgument(fmt::format("config: unknown key '{}'", key));
}

ExperimentConfig ExperimentConfig::parse(std::istream& is)
{
    ExperimentConfig cfg;
    cfg.load(is);
    return cfg;
}

void ExperimentConfig::load(std::istream& is)
{
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos)
            v = v.substr(0, hash);
        v = trim(v);
        if (v.empty())
            continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos)
            throw InvalidArgument(fmt::format("config line {}: expected key=value", lineno));
        set(trim(v.substr(0, eq)), v.substr(eq + 1));
    }
}

void ExperimentConfig::validate() const
{
    if (!(b > a))
        throw InvalidArgument(fmt::format("config: need b > a, got a={} b={}", a, b));
    if (n < 1 || n > 8192)
        throw InvalidArgument(fmt::format("config: n must lie in [1, 8192], got {}", n));
    if (!(s > 0.0 && s < 1.0))
        throw InvalidArgument(fmt::format("config: s must lie in (0,1), got {}", s));
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument(fmt::format("config: t must lie in [0,1], got {}", t));
    solver.validate();
    if (!(two_star > 2.0))
        throw InvalidArgument("config: two_star must exceed 2");
    if (two_star_s && !(*two_star_s > 2.0))
        throw InvalidArgument("config: two_star_s must exceed 2");
    if (m_max < 1)
        throw InvalidArgument("config: m_max must be >= 1");
    if (!(fit_fraction > 0.0 && fit_fraction <= 0.5))
        throw InvalidArgument("config: fit_fraction must lie in (0, 0.5]");
    if (output_dir.empty())
        throw InvalidArgument("config: output_dir is empty");
    (void)expression(); // surfaces parse errors before any computation
}

std::string ExperimentConfig::to_key_value() const
{
    std::string out;
    out += fmt::format("a={:.17g}\nb={:.17g}\nn={}\ns={:.17g}\nt={:.17g}\n", a, b, n, s, t);
    out += fmt::format("normalization={}\ng={}\nsuite={}\noutput_dir={}\nseed={}\n", to_string(normalization),
                       g, suite, output_dir, seed);
    out += fmt::format("cg_tol={:.17g}\ncg_max_iter={}\npicard_damping={:.17g}\npicard_tol={:.17g}\n",
                       solver.cg_tol, solver.cg_max_iter, solver.picard_damping, solver.picard_tol);
    out += fmt::format("picard_max_iter={}\nnewton_switch_tol={:.17g}\nuse_newton={}\n", solver.picard_max_iter,
                       solver.newton_switch_tol, solver.use_newton ? "true" : "false");
    out += fmt::format("two_star={:.17g}\n", two_star);
    if (two_star_s)
        out += fmt::format("two_star_s={:.17g}\n", *two_star_s);
    out += fmt::format("m_max={}\nfit_fraction={:.17g}\n", m_max, fit_fraction);
    return out;
}

Grid ExperimentConfig::grid() const { return Grid::build(a, b, n); }

FractionalOrder ExperimentConfig::order() const { return FractionalOrder(s, normalization); }

Expression ExperimentConfig::expression() const
{
    try {
        return Expression::parse(g);
    } catch (const ParseError& e) {
        throw InvalidArgument(fmt::format("config: g: {}", e.what()));
    }
}

// ---------------------------------------------------------------------------

GridFunction random_sine_field(const Grid& grid, std::mt19937_64& rng, int modes)
{
    std::normal_distribution<double> normal;
    std::vector<double> coeff(static_cast<std::size_t>(modes));
    for (int k = 1; k <= modes; ++k)
        coeff[static_cast<std::size_t>(k - 1)] = normal(rng) / k;
    const double L = grid.length();
    std::vector<double> v(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double xi = std::numbers::pi * (grid.node(i) - grid.a()) / L;
        CompensatedSum acc;
        for (int k = 1; k <= modes; ++k)
            acc += coeff[static_cast<std::size_t>(k - 1)] * std::sin(k * xi);
        v[i] = acc.value();
    }
    return GridFunction(grid, std::move(v));
}

Nonlinearity make_nonlinearity(const Expression& g)
{
    Nonlinearity out = Nonlinearity::from([g](double x, double u) { return g.evaluate(x, u); });
    if (!g.depends_on_u()) {
        out.du = [](double, double) { return 0.0; };
        out.u_independent = true;
    }
    return out;
}

SemilinearResult solve_configured(const ExperimentConfig& cfg)
{
    cfg.validate();
    const MixedOperator op = assemble_mixed(cfg.grid(), cfg.order(), cfg.t);
    return solve_semilinear(op, make_nonlinearity(cfg.expression()), cfg.solver);
}

std::string_view to_string(MaxPrincipleVerdict v) noexcept
{
    switch (v) {
    case MaxPrincipleVerdict::pass:
        return "pass";
    case MaxPrincipleVerdict::fail:
        return "fail";
    case MaxPrincipleVerdict::vacuous:
        return "vacuous";
    case MaxPrincipleVerdict::rejected:
        return "rejected";
    }
    return "unknown";
}

MaxPrincipleResult run_max_principle_check(const ExperimentConfig& cfg)
{
    cfg.validate();
    const Grid grid = cfg.grid();
    const Expression g = cfg.expression();
    const SemilinearResult sol = solve_configured(cfg);
    if (!sol.converged)
        throw ConvergenceError("maxprinciple", fmt::format("semilinear solve {}", to_string(sol.status)),
                               sol.residual_sup, sol.history);

    MaxPrincipleResult out;
    const auto u = sol.u.values();
    out.min_u = *std::min_element(u.begin(), u.end());
    out.max_u = *std::max_element(u.begin(), u.end());
    const double bound = max_abs(u);

    // 100 x 100 samples of g over Omega x [-||u||_inf, ||u||_inf].
    constexpr int samples = 100;
    out.min_g_sampled = infinity;
    bool all_zero = true;
    for (int i = 0; i < samples; ++i) {
        const double x = cfg.a + (i + 0.5) * grid.length() / samples;
        for (int j = 0; j < samples; ++j) {
            const double uval = -bound + 2.0 * bound * j / (samples - 1);
            const double gv = g.evaluate(x, uval);
            out.min_g_sampled = std::min(out.min_g_sampled, gv);
            all_zero = all_zero && gv == 0.0;
        }
    }
    if (out.min_g_sampled < 0.0) {
        out.verdict = MaxPrincipleVerdict::rejected;
        out.message = fmt::format("g takes negative values (min sampled {:.6g}); configuration rejected",
                                  out.min_g_sampled);
        return out;
    }
    if (bound == 0.0 || all_zero) {
        out.verdict = MaxPrincipleVerdict::vacuous;
        out.message = "trivial solution, principle vacuous";
        return out;
    }
    out.required_margin = 1e-3 * out.max_u * (grid.h() / grid.length());
    const bool ok = out.min_u > 0.0 && out.min_u >= out.required_margin;
    out.verdict = ok ? MaxPrincipleVerdict::pass : MaxPrincipleVerdict::fail;
    out.message = fmt::format("min u = {:.6g}, required margin {:.6g}", out.min_u, out.required_margin);
    return out;
}

// ---------------------------------------------------------------------------

SemilinearResult run_solve(const ExperimentConfig& cfg, std::ostream& solution, std::ostream* history)
{
    SemilinearResult res = solve_configured(cfg);
    write_csv(solution, res.u);
    if (history) {
        *history << "iter,residual\n";
        for (std::size_t k = 0; k < res.history.size(); ++k)
            *history << fmt::format("{},{:.17g}\n", k, res.history[k]);
    }
    return res;
}

void run_eig(const ExperimentConfig& cfg, std::ostream& os, std::ostream* eigenfunction)
{
    cfg.validate();
    const MixedOperator op = assemble_mixed(cfg.grid(), cfg.order(), cfg.t);
    const EigenGap gap = eigengap(op);
    os << "s,t,n,lambda1,lambda2,residual\n";
    os << fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g}\n", cfg.s, cfg.t, cfg.n, gap.lambda1, gap.lambda2,
                      gap.residual1);
    if (eigenfunction)
        write_csv(*eigenfunction, *gap.phi1);
}

namespace {

SemilinearResult require_converged(SemilinearResult r, const char* op)
{
    if (!r.converged)
        throw ConvergenceError(op, fmt::format("semilinear solve {}", to_string(r.status)), r.residual_sup,
                               r.history);
    return r;
}

} // namespace

void run_moser(const ExperimentConfig& cfg, std::ostream& os)
{
    const SemilinearResult sol = require_converged(solve_configured(cfg), "moser");
    write_csv(os, moser_trace(sol.u, cfg.two_star, cfg.m_max));
}

RegularityReport run_regularity(const ExperimentConfig& cfg, std::ostream& os, std::ostream* report)
{
    cfg.validate();
    std::vector<GridFunction> levels;
    ExperimentConfig level_cfg = cfg;
    for (int l = 0; l < 3; ++l) {
        if (level_cfg.n > 8192)
            throw InvalidArgument("regularity: the finest level would exceed n = 8192");
        levels.push_back(require_converged(solve_configured(level_cfg), "regularity").u);
        level_cfg.n = 2 * level_cfg.n + 1;
    }
    std::vector<double> alphas;
    for (int k = 1; k <= 10; ++k)
        alphas.push_back(0.1 * k);
    RegularityReport rep = estimate_gradient_holder(levels, alphas, HolderWindow::full);
    write_csv(os, rep);

    const RegularityReport fit = boundary_fit(levels.back(), cfg.s, cfg.fit_fraction);
    rep.s = cfg.s;
    rep.boundary_slope_a = fit.boundary_slope_a;
    rep.boundary_quadratic_b = fit.boundary_quadratic_b;
    rep.fractional_coefficient = fit.fractional_coefficient;
    rep.r2_linear_model = fit.r2_linear_model;
    rep.r2_fractional_model = fit.r2_fractional_model;
    rep.fit_nodes = fit.fit_nodes;
    if (report) {
        *report << fmt::format("normalization={}\n", to_string(cfg.normalization));
        *report << to_key_value(rep);
    }
    return rep;
}

std::string failure_line(std::string_view op, std::string_view reason, double residual)
{
    auto token = [](std::string_view text) {
        std::string out;
        for (char c : text)
            out += std::isspace(static_cast<unsigned char>(c)) ? '_' : c;
        return out.empty() ? std::string("-") : out;
    };
    return fmt::format("FAIL {} {} {:.6e}", token(op), token(reason), residual);
}

} // namespace mixlab
