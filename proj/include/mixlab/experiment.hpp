#ifndef MIXLAB_EXPERIMENT_HPP
#define MIXLAB_EXPERIMENT_HPP

#include "mixlab/expression.hpp"
#include "mixlab/grid.hpp"
#include "mixlab/norms.hpp"
#include "mixlab/regularity.hpp"
#include "mixlab/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mixlab {

/// Exit codes shared by the suite runner and the CLI.
enum class ExitCode : int { pass = 0, check_failed = 1, usage = 2, numeric = 3 };

/// Flat key=value experiment description. Keys:
///   a, b, n, s, t, normalization, g (alias f), suite, output_dir, seed,
///   cg_tol, cg_max_iter, picard_damping, picard_tol, picard_max_iter,
///   newton_switch_tol, use_newton, two_star, two_star_s, m_max, fit_fraction
struct ExperimentConfig {
    double a = 0.0;
    double b = 1.0;
    std::size_t n = 511;
    double s = 0.5;
    double t = 1.0;
    Normalization normalization = Normalization::standard;
    std::string g = "1";
    SolveConfig solver;
    std::string suite = "all";
    std::string output_dir = ".";
    std::uint64_t seed = 42;
    double two_star = 6.0;
    std::optional<double> two_star_s;
    std::size_t m_max = 8;
    double fit_fraction = 0.1;

    /// Sets one key from its text value; throws InvalidArgument on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    /// Applies `key = value` lines on top of the current values; '#' starts a comment.
    void load(std::istream& is);
    /// load() on a default-constructed config.
    static ExperimentConfig parse(std::istream& is);
    /// Checks every field (and that g parses) before any computation starts.
    void validate() const;
    std::string to_key_value() const;

    Grid grid() const;
    FractionalOrder order() const;
    Expression expression() const;
};

/// sum_{k=1..modes} z_k / k * sin(k pi (x - a) / (b - a)) with z_k ~ N(0, 1): the smooth
/// random fields used by the randomized property sweeps.
GridFunction random_sine_field(const Grid& grid, std::mt19937_64& rng, int modes = 16);

/// Wraps a parsed expression as a solver nonlinearity.
Nonlinearity make_nonlinearity(const Expression& g);

/// Solves A(t) u = g(x, u) for the configured problem.
SemilinearResult solve_configured(const ExperimentConfig& cfg);

enum class MaxPrincipleVerdict { pass, fail, vacuous, rejected };
std::string_view to_string(MaxPrincipleVerdict v) noexcept;

struct MaxPrincipleResult {
    MaxPrincipleVerdict verdict = MaxPrincipleVerdict::fail;
    double min_u = 0.0;
    double max_u = 0.0;
    double required_margin = 0.0; ///< 1e-3 * max u * (min boundary distance / |Omega|)
    double min_g_sampled = 0.0;
    std::string message;
};

/// Samples g on a 100 x 100 grid over Omega x [-||u||_inf, ||u||_inf]; rejects the
/// configuration if g < 0 anywhere, reports a vacuous check for u = 0, and
/// otherwise passes iff min u_i >= the quantitative interior margin (> 0).
MaxPrincipleResult run_max_principle_check(const ExperimentConfig& cfg);

/// Solution CSV (`x,u`) and optional history CSV (`iter,residual`).
SemilinearResult run_solve(const ExperimentConfig& cfg, std::ostream& solution,
                           std::ostream* history = nullptr);
/// One line `s,t,n,lambda1,lambda2,residual` with header; optional eigenfunction CSV.
void run_eig(const ExperimentConfig& cfg, std::ostream& os, std::ostream* eigenfunction = nullptr);
/// Moser trace `m,beta,A` of the configured solution.
void run_moser(const ExperimentConfig& cfg, std::ostream& os);
/// Gradient Hoelder flags `alpha,level,quotient,flag` over n, 2n+1, 4n+3, plus an
/// optional key=value report including the boundary fit.
RegularityReport run_regularity(const ExperimentConfig& cfg, std::ostream& os,
                                std::ostream* report = nullptr);

enum class Verdict { pass, fail, vacuous, rejected, error };
std::string_view to_string(Verdict v) noexcept;

struct CheckResult {
    std::string suite;
    std::string name;
    std::string property; ///< what is being probed, in words
    double measured = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::fail;
    std::string detail;
};

struct SuiteResult {
    std::vector<CheckResult> checks;
    ExitCode exit_code = ExitCode::pass;
};

const std::vector<std::string>& suite_names();

/// Runs the selected suite (or all of them), writing one CSV per check into
/// cfg.output_dir and a summary to `summary`. The first summary line carries a
/// timestamp; everything else is deterministic for a fixed config and seed.
/// An unknown suite name throws InvalidArgument listing the valid ones.
SuiteResult run_suite(const ExperimentConfig& cfg, std::ostream& summary);

/// Machine-readable failure line `FAIL <op> <reason> <residual>`.
std::string failure_line(std::string_view op, std::string_view reason, double residual);

} // namespace mixlab

#endif // MIXLAB_EXPERIMENT_HPP
