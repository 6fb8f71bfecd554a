#include "mixlab/error.hpp"
#include "mixlab/experiment.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/numeric.hpp"
#include "mixlab/regularity.hpp"
#include "mixlab/spectral.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>

namespace mixlab {

std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    case Verdict::vacuous:
        return "vacuous";
    case Verdict::rejected:
        return "rejected";
    case Verdict::error:
        return "error";
    }
    return "unknown";
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"norms",    "operator", "eig",    "maxprinciple", "truncation",
                                                "moser",    "sublinear", "holder", "boundary",     "weakform",
                                                "continuity", "w2p",     "all"};
    return names;
}

namespace {

// One suite run: collects check results and opens per-check CSV files.
class Context {
public:
    Context(const ExperimentConfig& cfg, std::string suite) : cfg(cfg), suite(std::move(suite)) {}

    std::ofstream csv(const std::string& name) const
    {
        const auto path = std::filesystem::path(cfg.output_dir) / fmt::format("{}_{}.csv", suite, name);
        std::ofstream os(path);
        if (!os)
            throw InvalidArgument(fmt::format("cannot write {}", path.string()));
        return os;
    }

    void record(std::string name, std::string property, double measured, double threshold, bool pass,
                std::string detail = {})
    {
        results.push_back({suite, std::move(name), std::move(property), measured, threshold,
                           pass ? Verdict::pass : Verdict::fail, std::move(detail)});
    }

    void record(CheckResult r)
    {
        r.suite = suite;
        results.push_back(std::move(r));
    }

    std::mt19937_64 rng() const { return std::mt19937_64(cfg.seed); }

    const ExperimentConfig& cfg;
    std::string suite;
    std::vector<CheckResult> results;
};

std::size_t refine(std::size_t n) { return 2 * n + 1; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

GridFunction ones(const Grid& g) { return GridFunction(g, std::vector<double>(g.n(), 1.0)); }

GridFunction solve_f(const Grid& grid, const FractionalOrder& s, double t, const GridFunction& f,
                     const SolveConfig& cfg)
{
    return solve_linear(assemble_mixed(grid, s, t), f, cfg);
}

// ---------------------------------------------------------------------------

void suite_norms(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const FractionalOrder s = cfg.order();
    auto rng = ctx.rng();
    auto os = ctx.csv("equivalence");
    os << "n,K,max_ratio\n";
    std::vector<double> ks;
    double worst = 0.0;
    for (std::size_t n : {cfg.n, refine(cfg.n)}) {
        const Grid grid = Grid::build(cfg.a, cfg.b, n);
        const double K = norm_equivalence_constant(grid, s);
        double max_ratio = 0.0;
        for (int f = 0; f < 1000; ++f) {
            const GridFunction u = random_sine_field(grid, rng);
            max_ratio = std::max(max_ratio, gagliardo_seminorm_sq(u, s) / gradient_norm_sq(u));
        }
        os << fmt::format("{},{:.17g},{:.17g}\n", n, K, max_ratio);
        ks.push_back(K);
        worst = std::max(worst, max_ratio / K);
    }
    ctx.record("equivalence_bound", "fractional seminorm bounded by K times the gradient norm", worst,
               1.0 + 1e-10, worst <= 1.0 + 1e-10, "max over fields of ratio/K");
    const double change = rel(ks[1], ks[0]);
    ctx.record("equivalence_stability", "norm-equivalence constant stable under refinement", change, 0.15,
               change <= 0.15, fmt::format("K(n)={:.6g} K(2n+1)={:.6g}", ks[0], ks[1]));

    const Grid grid = cfg.grid();
    const GridFunction u = random_sine_field(grid, rng);
    double err = 0.0;
    for (double p : {1.0, 2.0, 3.5, infinity})
        for (double c : {-2.5, 0.3, 7.0})
            err = std::max(err, rel(lp_norm(c * u, p), std::abs(c) * lp_norm(u, p)));
    ctx.record("homogeneity", "L^p norms absolutely homogeneous", err, 1e-13, err <= 1e-13);
}

// Closed form of (-Delta)^s (1-x^2)_+^{1+s} inside (-1,1), standard constant.
double bubble_closed_form(double s, double x)
{
    return std::pow(4.0, s) * std::tgamma(s + 2.0) * std::tgamma(s + 0.5) / std::tgamma(0.5) *
           (1.0 - (1.0 + 2.0 * s) * x * x);
}

void suite_operator(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const FractionalOrder s = cfg.order();
    const Grid grid = cfg.grid();
    const MixedOperator op = assemble_mixed(grid, s, cfg.t);
    const std::size_t n = grid.n();

    double max_off = -infinity, min_diag = infinity, asym = 0.0, min_dominance = infinity;
    for (std::size_t i = 0; i < n; ++i) {
        double off_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double e = op.entry(i, j);
            max_off = std::max(max_off, e);
            off_sum += std::abs(e);
            asym = std::max(asym, std::abs(e - op.entry(j, i)));
        }
        min_diag = std::min(min_diag, op.diagonal(i));
        min_dominance = std::min(min_dominance, op.diagonal(i) - off_sum);
    }
    {
        auto os = ctx.csv("structure");
        os << "max_offdiagonal,min_diagonal,max_asymmetry,min_dominance_margin\n";
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", max_off, min_diag, asym, min_dominance);
    }
    ctx.record("symmetry", "operator symmetric entrywise", asym, 0.0, asym == 0.0);
    ctx.record("m_matrix", "nonpositive off-diagonals, positive diagonal, diagonal dominance",
               std::max(max_off, n > 1 ? 0.0 : max_off), 0.0,
               (n == 1 || max_off <= 0.0) && min_diag > 0.0 && min_dominance > 0.0,
               fmt::format("min dominance margin {:.6g}", min_dominance));

    // Row sums of A_frac against the analytic tails.
    const FractionalMatrix& frac = op.fractional();
    std::vector<double> one(n, 1.0), row(n);
    frac.apply(one, row);
    double tail_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tail = s.c_s() *
                            (std::pow(grid.node(i) - grid.a(), -s.two_s()) + std::pow(grid.b() - grid.node(i), -s.two_s())) /
                            s.two_s();
        tail_err = std::max(tail_err, rel(row[i], tail));
    }
    ctx.record("row_sums", "fractional row sums equal the exterior tail mass", tail_err, 1e-10, tail_err <= 1e-10);

    // Consistency against the closed form on (-1, 1) at the 5 central nodes.
    {
        std::size_t m = cfg.n % 2 == 1 ? cfg.n : cfg.n + 1;
        const Grid sym = Grid::build(-1.0, 1.0, m);
        const double ss = s.s();
        const FractionalMatrix f = assemble_fractional(sym, s);
        const GridFunction u =
            GridFunction::sample(sym, [ss](double x) { return std::pow(std::max(0.0, 1.0 - x * x), 1.0 + ss); });
        std::vector<double> au(m);
        f.apply(u.values(), au);
        const double scale = s.normalization() == Normalization::unit ? 1.0 / standard_constant(ss) : 1.0;
        auto os = ctx.csv("consistency");
        os << "x,discrete,closed_form,relative_error\n";
        double err = 0.0;
        for (std::size_t i = m / 2 - 2; i <= m / 2 + 2; ++i) {
            const double ref = scale * bubble_closed_form(ss, sym.node(i));
            const double e = rel(au[i], ref);
            err = std::max(err, e);
            os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", sym.node(i), au[i], ref, e);
        }
        ctx.record("consistency", "fractional Laplacian of the bubble profile matches its closed form", err, 1e-3,
                   err <= 1e-3, fmt::format("n={} on (-1,1)", m));
    }

    auto rng = ctx.rng();
    const GridFunction u = random_sine_field(grid, rng);
    const GridFunction v = random_sine_field(grid, rng);
    const GridFunction lhs = op.apply(2.0 * u - 3.0 * v);
    const GridFunction rhs = 2.0 * op.apply(u) - 3.0 * op.apply(v);
    const double lin = max_abs((lhs - rhs).values()) / max_abs(rhs.values());
    ctx.record("linearity", "apply is linear", lin, 1e-12, lin <= 1e-12);

    // Quadratic form against the seminorm with the operator's constant.
    {
        const MixedOperator fr = op.with_t(1.0);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const GridFunction w = random_sine_field(grid, rng);
            const double form = fr.energy(w) - op.with_t(0.0).energy(w);
            const double ref = 0.5 * s.c_s() * gagliardo_seminorm_sq(w, s);
            worst = std::max(worst, rel(form, ref));
        }
        ctx.record("quadratic_form", "energy of the nonlocal part matches (c_s/2)[u]_s^2", worst, 0.02,
                   worst <= 0.02);
    }

    // Inverse positivity.
    {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double min_u = infinity;
        for (int k = 0; k < 20; ++k) {
            std::vector<double> f(n);
            for (double& x : f)
                x = unif(rng);
            const GridFunction sol = solve_linear(op, GridFunction(grid, std::move(f)), cfg.solver);
            for (double x : sol.values())
                min_u = std::min(min_u, x);
        }
        ctx.record("inverse_positive", "nonnegative data give nonnegative solutions", min_u, 0.0, min_u >= 0.0);
    }
}

void suite_eig(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const FractionalOrder s = cfg.order();
    const Grid grid = cfg.grid();
    const MixedOperator base = assemble_mixed(grid, s, 0.0);
    auto os = ctx.csv("eig");
    os << "s,t,n,lambda1,lambda2,residual\n";
    double prev = -infinity, min_gap = infinity, min_phi = infinity;
    bool monotone = true;
    double local_err = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const MixedOperator op = base.with_t(t);
        const EigenGap gap = eigengap(op);
        os << fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g}\n", cfg.s, t, cfg.n, gap.lambda1, gap.lambda2,
                          gap.residual1);
        monotone = monotone && gap.lambda1 >= prev;
        prev = gap.lambda1;
        min_gap = std::min(min_gap, gap.gap() / gap.lambda1);
        for (double x : gap.phi1->values())
            min_phi = std::min(min_phi, x);
        if (t == 0.0) {
            const double h = grid.h();
            const double exact = 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h / grid.length()));
            local_err = rel(gap.lambda1, exact);
        }
    }
    ctx.record("local_closed_form", "pure local eigenvalue equals the tridiagonal closed form", local_err, 1e-8,
               local_err <= 1e-8);
    ctx.record("simple", "principal eigenvalue simple (relative gap)", min_gap, 1e-6, min_gap > 1e-6);
    ctx.record("positive_eigenfunction", "principal eigenfunction strictly positive", min_phi, 0.0, min_phi > 0.0);
    ctx.record("monotone_in_t", "principal eigenvalue nondecreasing in t", monotone ? 1.0 : 0.0, 1.0, monotone);
}

CheckResult max_principle_check(const ExperimentConfig& cfg, const std::string& name)
{
    const MaxPrincipleResult r = run_max_principle_check(cfg);
    CheckResult c;
    c.name = name;
    c.property = "strong maximum principle with interior margin";
    c.measured = r.min_u;
    c.threshold = r.required_margin;
    c.detail = r.message;
    switch (r.verdict) {
    case MaxPrincipleVerdict::pass:
        c.verdict = Verdict::pass;
        break;
    case MaxPrincipleVerdict::fail:
        c.verdict = Verdict::fail;
        break;
    case MaxPrincipleVerdict::vacuous:
        c.verdict = Verdict::vacuous;
        break;
    case MaxPrincipleVerdict::rejected:
        c.verdict = Verdict::rejected;
        c.measured = r.min_g_sampled;
        break;
    }
    return c;
}

void suite_maxprinciple(Context& ctx)
{
    auto os = ctx.csv("maxprinciple");
    os << "case,s,min_u,max_u,margin,verdict\n";
    auto run = [&](ExperimentConfig c, const std::string& name) {
        CheckResult r = max_principle_check(c, name);
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", name, c.s, r.measured, 0.0, r.threshold,
                          to_string(r.verdict));
        ctx.record(std::move(r));
    };
    run(ctx.cfg, "configured");
    for (double s : {0.25, 0.5, 0.75}) {
        ExperimentConfig c = ctx.cfg;
        c.g = "1";
        c.t = 1.0;
        c.s = s;
        run(c, fmt::format("unit_source_s{}", s));
    }
}

void suite_truncation(Context& ctx)
{
    auto rng = ctx.rng();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_params = [&] {
        TruncationParams p;
        p.beta = 1.0 + 3.0 * (1.0 - unit(rng)); // (1, 4]
        p.T = 2.0 * (1.0 - unit(rng));          // (0, 2]
        return p;
    };
    double min_gap = infinity;
    double bound_violation = 0.0, lipschitz_violation = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const TruncationParams p = draw_params();
        const double a = (6.0 * unit(rng) - 3.0) * p.T;
        const double b = (6.0 * unit(rng) - 3.0) * p.T;
        min_gap = std::min(min_gap, convexity_gap(a, b, p));
    }
    for (int k = 0; k < 100000; ++k) {
        const TruncationParams p = draw_params();
        const double t1 = (6.0 * unit(rng) - 3.0) * p.T;
        const double t2 = (6.0 * unit(rng) - 3.0) * p.T;
        const PhiValue f1 = truncation_phi(t1, p);
        const PhiValue f2 = truncation_phi(t2, p);
        const double at = std::abs(t1);
        auto excess = [](double lhs, double rhs) { return (lhs - rhs) / std::max(1.0, std::abs(rhs)); };
        bound_violation = std::max({bound_violation, excess(f1.value, std::pow(at, p.beta)),
                                    excess(std::abs(f1.derivative), p.beta * std::pow(at, p.beta - 1.0)),
                                    excess(std::abs(t1 * f1.derivative), p.beta * f1.value)});
        lipschitz_violation = std::max(
            lipschitz_violation, excess(std::abs(f1.value - f2.value), truncation_lipschitz(p) * std::abs(t1 - t2)));
    }
    auto os = ctx.csv("truncation");
    os << "min_convexity_gap,max_bound_violation,max_lipschitz_violation\n";
    os << fmt::format("{:.17g},{:.17g},{:.17g}\n", min_gap, bound_violation, lipschitz_violation);
    ctx.record("convexity_gap", "convexity inequality of the truncated power", min_gap, -1e-12, min_gap >= -1e-12);
    ctx.record("pointwise_bounds", "phi <= |t|^beta, |phi'| <= beta|t|^(beta-1), |t phi'| <= beta phi",
               bound_violation, 1e-12, bound_violation <= 1e-12);
    ctx.record("lipschitz", "phi Lipschitz with constant beta T^(beta-1)", lipschitz_violation, 1e-12,
               lipschitz_violation <= 1e-12);
}

bool nonincreasing_after_peak(const std::vector<double>& a)
{
    const auto peak = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
    for (std::size_t m = peak; m + 1 < a.size(); ++m)
        if (a[m + 1] > a[m] * (1.0 + 1e-12))
            return false;
    return true;
}

void suite_moser(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    auto os = ctx.csv("moser");
    os << "n,m,beta,A\n";
    std::vector<double> c0;
    bool shape = true, bound = true;
    ExperimentConfig level = cfg;
    for (int l = 0; l < 2; ++l) {
        const SemilinearResult sol = solve_configured(level);
        if (!sol.converged)
            throw ConvergenceError("moser", "semilinear solve did not converge", sol.residual_sup);
        const MoserTrace tr = moser_trace(sol.u, cfg.two_star, cfg.m_max);
        for (std::size_t m = 0; m < tr.A.size(); ++m)
            os << fmt::format("{},{},{:.17g},{:.17g}\n", level.n, m + 1, tr.beta[m], tr.A[m]);
        shape = shape && !tr.truncated && nonincreasing_after_peak(tr.A);
        bound = bound && max_abs(sol.u.values()) <= tr.C0_estimate * tr.A.front();
        c0.push_back(tr.C0_estimate);
        level.n = refine(level.n);
    }
    ctx.record("trace_shape", "A_m finite and nonincreasing after its peak", shape ? 1.0 : 0.0, 1.0, shape);
    const double change = rel(c0[1], c0[0]);
    ctx.record("c0_stability", "C0 estimate stable under refinement", change, 0.10, change <= 0.10);
    ctx.record("sup_bound", "sup norm bounded by C0 A_1", bound ? 1.0 : 0.0, 1.0, bound);
}

void suite_sublinear(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const Grid grid = cfg.grid();
    const FractionalOrder s = cfg.order();
    const MixedOperator op = assemble_mixed(grid, s, cfg.t);
    const Expression gexpr = Expression::parse("1 + abs(u)^0.5");
    const Nonlinearity g = make_nonlinearity(gexpr);
    auto rng = ctx.rng();
    std::uniform_real_distribution<double> amp(0.5, 10.0);

    auto os = ctx.csv("sublinear");
    os << "start,sup_u,residual,iterations\n";
    std::vector<GridFunction> sols;
    bool all_converged = true;
    for (int k = 0; k < 10; ++k) {
        const GridFunction start = amp(rng) * random_sine_field(grid, rng);
        const SemilinearResult r = solve_semilinear(op, g, cfg.solver, start);
        all_converged = all_converged && r.converged;
        os << fmt::format("{},{:.17g},{:.17g},{}\n", k, max_abs(r.u.values()), r.residual_sup, r.iterations);
        sols.push_back(r.u);
    }
    double spread = 0.0;
    for (const auto& u : sols)
        spread = std::max(spread, max_abs((u - sols.front()).values()));
    ctx.record("uniqueness", "solutions from random starts agree", spread, 1e-6, all_converged && spread <= 1e-6);

    // B_m trace of the solution.
    std::optional<double> two_star_s = cfg.two_star_s;
    if (!two_star_s && cfg.s >= 0.5)
        two_star_s = cfg.two_star;
    const MoserTrace tr = sublinear_trace(sols.front(), s, cfg.m_max, two_star_s);
    const bool bounded = !tr.truncated && std::isfinite(tr.C0_estimate) &&
                         max_abs(sols.front().values()) <= tr.C0_estimate * tr.A.front();
    ctx.record("b_trace", "B_m bounded and sup norm below C B_1", tr.C0_estimate, 0.0, bounded);

    // Below the principal eigenvalue only the zero solution exists; at it the solution set is a ray.
    const EigenPair pair = principal_eigenpair(op);
    const double lambda1 = pair.lambda1;
    const GridFunction start = GridFunction::sample(grid, [&](double x) {
        const double y = (x - grid.a()) / grid.length();
        return y * (1.0 - y) * (1.0 + y);
    });
    const SemilinearResult below = solve_semilinear(
        op, Nonlinearity::from([lambda1](double, double u) { return 0.5 * lambda1 * u; }), cfg.solver, start);
    const double sup_below = max_abs(below.u.values());
    ctx.record("below_lambda1_trivial", "g = lambda u with lambda < lambda1 forces u = 0", sup_below, 1e-6,
               below.converged && sup_below <= 1e-6);
    const ResonanceReport res = detect_resonance(
        op, Nonlinearity::from([lambda1](double, double u) { return lambda1 * u; }), start, cfg.solver);
    ctx.record("resonance_flagged", "g = lambda1 u reported non-unique/resonant", res.relative_difference, 1e-3,
               res.non_unique);
}

GridFunction hat_profile(const Grid& grid)
{
    return GridFunction::sample(grid, [&](double x) { return std::min(x - grid.a(), grid.b() - x); });
}

void suite_holder(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    struct Pair {
        double s, alpha;
    };
    const std::vector<Pair> stable{{0.2, 0.5}, {0.1, 0.7}, {0.25, 0.45}};
    const std::vector<Pair> growing{{0.35, 0.5}, {0.4, 0.5}, {0.45, 0.6}};
    auto os = ctx.csv("holder");
    os << "s,alpha,alpha_plus_2s,n,ratio\n";
    auto sweep = [&](const Pair& p) {
        std::vector<double> q;
        std::size_t n = cfg.n;
        for (int l = 0; l < 3; ++l, n = refine(n)) {
            const Grid grid = Grid::build(cfg.a, cfg.b, n);
            q.push_back(fractional_holder_ratio(hat_profile(grid), FractionalOrder(p.s, cfg.normalization), p.alpha));
            os << fmt::format("{:.17g},{:.17g},{:.17g},{},{:.17g}\n", p.s, p.alpha, p.alpha + 2 * p.s, n, q.back());
        }
        return q;
    };
    double worst_dev = 0.0;
    for (const Pair& p : stable) {
        const auto q = sweep(p);
        for (double v : q)
            worst_dev = std::max(worst_dev, std::abs(v / q.front() - 1.0));
    }
    ctx.record("stable_below_threshold", "Hoelder ratio of the fractional term bounded when alpha+2s <= 1",
               worst_dev, 0.2, worst_dev <= 0.2);
    double min_growth = infinity;
    for (const Pair& p : growing) {
        const auto q = sweep(p);
        for (std::size_t l = 1; l < q.size(); ++l)
            min_growth = std::min(min_growth, q[l] / q[l - 1]);
    }
    ctx.record("growth_above_threshold", "Hoelder ratio of the fractional term grows when alpha+2s > 1", min_growth,
               1.3, min_growth >= 1.3);
}

void suite_boundary(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    auto os = ctx.csv("boundary");
    os << "n,a,b,c,r2_linear,r2_fractional\n";
    std::vector<RegularityReport> fits;
    ExperimentConfig level = cfg;
    for (int l = 0; l < 2; ++l, level.n = refine(level.n)) {
        const SemilinearResult sol = solve_configured(level);
        if (!sol.converged)
            throw ConvergenceError("boundary", "semilinear solve did not converge", sol.residual_sup);
        fits.push_back(boundary_fit(sol.u, cfg.s, cfg.fit_fraction));
        const auto& f = fits.back();
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", level.n, f.boundary_slope_a,
                          f.boundary_quadratic_b, f.fractional_coefficient, f.r2_linear_model, f.r2_fractional_model);
    }
    const auto& fine = fits.back();
    ctx.record("linear_grading", "boundary profile linear rather than d^s", fine.r2_linear_model - fine.r2_fractional_model,
               0.0, fine.r2_linear_model > fine.r2_fractional_model);
    const double change = rel(fits[1].boundary_slope_a, fits[0].boundary_slope_a);
    ctx.record("slope_stability", "boundary slope stable under refinement", change, 0.02, change <= 0.02);
}

void suite_weakform(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const Grid grid = cfg.grid();
    const MixedOperator op = assemble_mixed(grid, cfg.order(), cfg.t);
    const Expression gexpr = cfg.expression();
    const SemilinearResult sol = solve_semilinear(op, make_nonlinearity(gexpr), cfg.solver);
    if (!sol.converged)
        throw ConvergenceError("weakform", "semilinear solve did not converge", sol.residual_sup);
    std::vector<double> gv(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i)
        gv[i] = gexpr.evaluate(grid.node(i), sol.u[i]);
    const GridFunction au = op.apply(sol.u);
    auto rng = ctx.rng();
    auto os = ctx.csv("weakform");
    os << "phi,bilinear,load,relative_error\n";
    double worst = 0.0;
    const double h = grid.h();
    for (int k = 0; k < 50; ++k) {
        const GridFunction phi = random_sine_field(grid, rng);
        CompensatedSum lhs, rhs, scale;
        for (std::size_t i = 0; i < grid.n(); ++i) {
            lhs += au[i] * phi[i];
            rhs += gv[i] * phi[i];
            scale += std::abs(gv[i] * phi[i]);
        }
        const double e = std::abs(h * (lhs.value() - rhs.value())) / std::max(h * scale.value(), 1e-300);
        worst = std::max(worst, e);
        os << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", k, h * lhs.value(), h * rhs.value(), e);
    }
    ctx.record("bilinear_identity", "discrete weak formulation against random test functions", worst, 1e-6,
               worst <= 1e-6);
}

void suite_continuity(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const Expression gexpr = cfg.expression();
    if (gexpr.depends_on_u()) {
        ctx.record({"", "continuation", "method of continuity (needs g independent of u)", 0.0, 0.0,
                    Verdict::rejected, "configured g depends on u"});
        return;
    }
    const Grid grid = cfg.grid();
    const FractionalOrder s = cfg.order();
    const GridFunction f = GridFunction::sample(grid, [&](double x) { return gexpr.evaluate(x, 0.0); });
    auto sweep = [&](int steps) {
        std::vector<double> ts;
        for (int k = 0; k <= steps; ++k)
            ts.push_back(static_cast<double>(k) / steps);
        return std::pair{ts, continuation_solve(grid, s, f, ts, cfg.solver)};
    };
    const auto [t1, coarse] = sweep(4);
    const auto [t2, fine] = sweep(8);
    auto os = ctx.csv("continuity");
    os << "t,sup_u\n";
    bool decreasing = true;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        os << fmt::format("{:.17g},{:.17g}\n", t1[k], max_abs(coarse[k].values()));
        if (k > 0)
            decreasing = decreasing && max_abs(coarse[k].values()) < max_abs(coarse[k - 1].values());
    }
    auto max_gap = [](const std::vector<GridFunction>& sols) {
        double gap = 0.0;
        for (std::size_t k = 1; k < sols.size(); ++k)
            gap = std::max(gap, max_abs((sols[k] - sols[k - 1]).values()));
        return gap;
    };
    const double ratio = max_gap(fine) / max_gap(coarse);
    ctx.record("sup_decreasing", "sup norm strictly decreasing in t", decreasing ? 1.0 : 0.0, 1.0, decreasing);
    ctx.record("first_order", "halving the t-step halves the consecutive gap", ratio, 0.5,
               ratio >= 0.3 && ratio <= 0.7, "accepted range [0.3, 0.7]");
}

void suite_w2p(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    // Window formula on 20 orders, including the branch switch at s = 1/2.
    auto os = ctx.csv("window");
    os << "s,n_dim,p_min,p_max\n";
    bool ok = true;
    for (int k = 1; k <= 20; ++k) {
        const double s = k < 20 ? 0.05 * k : 0.99;
        for (int d = 1; d <= 3; ++d) {
            const ExponentWindow w = w2p_window(s, d);
            os << fmt::format("{:.17g},{},{:.17g},{:.17g}\n", s, d, w.p_min, w.p_max);
            const bool expect_first = s <= 0.5;
            ok = ok && (expect_first ? (w.p_min == 1.0 && std::isinf(w.p_max))
                                     : (w.p_min == d && w.p_max == d / (2.0 * s - 1.0))) &&
                 w.p_min < w.p_max;
        }
    }
    ctx.record("window_formula", "W^{2,p} exponent window", ok ? 1.0 : 0.0, 1.0, ok);

    // Second differences of the f = 1 solution at s = 0.75 across refinements.
    const FractionalOrder s(0.75, cfg.normalization);
    const ExponentWindow w = w2p_window(0.75, 1);
    auto lp = ctx.csv("second_differences");
    lp << "p,n,norm\n";
    std::vector<double> ps{0.5 * (w.p_min + w.p_max), 3.0};
    std::vector<std::vector<double>> norms(ps.size());
    std::size_t n = std::max<std::size_t>(cfg.n / 2, 63);
    for (int l = 0; l < 4; ++l, n = refine(n)) {
        const Grid grid = Grid::build(cfg.a, cfg.b, n);
        const GridFunction u = solve_f(grid, s, 1.0, ones(grid), cfg.solver);
        for (std::size_t k = 0; k < ps.size(); ++k) {
            norms[k].push_back(second_difference_lp_norm(u, ps[k]));
            lp << fmt::format("{:.17g},{},{:.17g}\n", ps[k], n, norms[k].back());
        }
    }
    // Bounded: increments contract, so the sequence has a finite limit.
    auto contraction = [](const std::vector<double>& v) {
        double worst = 0.0;
        for (std::size_t k = 2; k < v.size(); ++k)
            worst = std::max(worst, std::abs(v[k] - v[k - 1]) / std::abs(v[k - 1] - v[k - 2]));
        return worst;
    };
    const double c_in = contraction(norms[0]);
    ctx.record("bounded_inside_window", fmt::format("second-difference L^{} norm bounded (s = 0.75)", ps[0]), c_in,
               1.0, c_in < 1.0, "largest ratio of successive increments");
    const double c_out = contraction(norms[1]);
    ctx.record({"", "p3_informational", "second-difference L^3 norm (outside the 1-D window)", c_out, 1.0,
                Verdict::vacuous, c_out < 1.0 ? "increments contract" : "increments grow: unbounded as expected"});
}

using SuiteFn = void (*)(Context&);

SuiteFn find_suite(const std::string& name)
{
    static const std::vector<std::pair<std::string, SuiteFn>> table{
        {"norms", suite_norms},       {"operator", suite_operator},   {"eig", suite_eig},
        {"maxprinciple", suite_maxprinciple}, {"truncation", suite_truncation}, {"moser", suite_moser},
        {"sublinear", suite_sublinear}, {"holder", suite_holder},     {"boundary", suite_boundary},
        {"weakform", suite_weakform}, {"continuity", suite_continuity}, {"w2p", suite_w2p},
    };
    for (const auto& [n, fn] : table)
        if (n == name)
            return fn;
    return nullptr;
}

std::string list_suites()
{
    std::string out;
    for (const auto& n : suite_names())
        out += (out.empty() ? "" : ", ") + n;
    return out;
}

} // namespace

SuiteResult run_suite(const ExperimentConfig& cfg, std::ostream& summary)
{
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), cfg.suite) == names.end())
        throw InvalidArgument(fmt::format("unknown suite '{}'; valid suites: {}", cfg.suite, list_suites()));
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<std::string> selected;
    if (cfg.suite == "all")
        selected.assign(names.begin(), names.end() - 1);
    else
        selected.push_back(cfg.suite);

    SuiteResult result;
    for (const std::string& name : selected) {
        Context ctx(cfg, name);
        try {
            find_suite(name)(ctx);
        } catch (const ConvergenceError& e) {
            ctx.record({name, "aborted", "suite completed without numeric failure", e.residual(), 0.0,
                        Verdict::error, failure_line(e.op(), e.reason(), e.residual())});
        } catch (const std::exception& e) {
            ctx.record({name, "aborted", "suite completed without numeric failure", 0.0, 0.0, Verdict::error,
                        e.what()});
        }
        for (auto& c : ctx.results)
            result.checks.push_back(std::move(c));
    }

    bool any_error = false, any_fail = false, any_rejected = false;
    for (const auto& c : result.checks) {
        any_error = any_error || c.verdict == Verdict::error;
        any_fail = any_fail || c.verdict == Verdict::fail;
        any_rejected = any_rejected || c.verdict == Verdict::rejected;
    }
    result.exit_code = any_error      ? ExitCode::numeric
                       : any_fail     ? ExitCode::check_failed
                       : any_rejected ? ExitCode::usage
                                      : ExitCode::pass;

    const auto now = std::chrono::system_clock::now();
    summary << fmt::format("# generated {:%Y-%m-%dT%H:%M:%SZ}\n", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
    summary << fmt::format("# suite={} normalization={} a={} b={} n={} s={} t={} seed={}\n", cfg.suite,
                           to_string(cfg.normalization), cfg.a, cfg.b, cfg.n, cfg.s, cfg.t, cfg.seed);
    if (cfg.order().near_degenerate())
        summary << fmt::format("# warning: s={} lies outside [0.05, 0.95]; c_s degenerates\n", cfg.s);
    summary << "check,property,measured,threshold,verdict,detail\n";
    std::size_t passed = 0;
    for (const auto& c : result.checks) {
        passed += c.verdict == Verdict::pass;
        summary << fmt::format("{}.{},\"{}\",{:.6e},{:.6e},{},\"{}\"\n", c.suite, c.name, c.property, c.measured,
                               c.threshold, to_string(c.verdict), c.detail);
    }
    summary << fmt::format("# {} of {} checks passed; exit code {}\n", passed, result.checks.size(),
                           static_cast<int>(result.exit_code));
    return result;
}

} // namespace mixlab
