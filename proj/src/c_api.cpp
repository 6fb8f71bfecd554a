#include "mixlab/mixlab.h"

#include "mixlab/error.hpp"
#include "mixlab/experiment.hpp"
#include "mixlab/expression.hpp"
#include "mixlab/mixed_operator.hpp"
#include "mixlab/solver.hpp"
#include "mixlab/spectral.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

struct mixlab_config {
    mixlab::ExperimentConfig cfg;
};

struct mixlab_operator {
    mixlab::MixedOperator op;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_failure;

mixlab_status fail(mixlab_status code, const std::string& message, const std::string& failure = {})
{
    last_error = message;
    last_failure = failure;
    return code;
}

// Maps exceptions from the core onto status codes.
template <class F>
mixlab_status guarded(F&& body)
{
    last_error.clear();
    last_failure.clear();
    try {
        return body();
    } catch (const mixlab::ConvergenceError& e) {
        return fail(MIXLAB_NUMERIC_FAILURE, e.what(), mixlab::failure_line(e.op(), e.reason(), e.residual()));
    } catch (const mixlab::NotPositiveDefinite& e) {
        return fail(MIXLAB_NUMERIC_FAILURE, e.what(), mixlab::failure_line("solve", "not_positive_definite", 0.0));
    } catch (const mixlab::EvaluationError& e) {
        return fail(MIXLAB_NUMERIC_FAILURE, e.what(), mixlab::failure_line("evaluate", e.what(), 0.0));
    } catch (const mixlab::ParseError& e) {
        return fail(MIXLAB_INVALID_ARGUMENT, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(MIXLAB_INVALID_ARGUMENT, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(MIXLAB_IO_ERROR, e.what());
    } catch (const std::exception& e) {
        return fail(MIXLAB_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(MIXLAB_INTERNAL_ERROR, "unknown exception");
    }
}

// Output stream for an optional path; stdout when the path is null and `fallback` is set.
class Output {
public:
    Output(const char* path, bool fallback_to_stdout)
    {
        if (path) {
            file_.emplace(path);
            if (!*file_)
                throw std::ios_base::failure(std::string("cannot open ") + path + " for writing");
            stream_ = &*file_;
        } else if (fallback_to_stdout) {
            stream_ = &std::cout;
        }
    }
    ~Output()
    {
        if (stream_)
            stream_->flush();
    }
    std::ostream* get() { return stream_; }
    std::ostream& operator*() { return *stream_; }

private:
    std::optional<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

#define MIXLAB_REQUIRE(cond, what)                                                                                     \
    do {                                                                                                               \
        if (!(cond))                                                                                                   \
            return fail(MIXLAB_INVALID_ARGUMENT, what);                                                                \
    } while (0)

} // namespace

extern "C" {

const char* mixlab_version(void) { return "1.0.0"; }

const char* mixlab_last_error(void) { return last_error.c_str(); }

const char* mixlab_last_failure_line(void) { return last_failure.c_str(); }

mixlab_status mixlab_config_create(mixlab_config** out)
{
    MIXLAB_REQUIRE(out, "mixlab_config_create: null output pointer");
    return guarded([&] {
        *out = new mixlab_config{};
        return MIXLAB_OK;
    });
}

void mixlab_config_destroy(mixlab_config* cfg) { delete cfg; }

mixlab_status mixlab_config_load(mixlab_config* cfg, const char* path)
{
    MIXLAB_REQUIRE(cfg && path, "mixlab_config_load: null argument");
    return guarded([&] {
        std::ifstream is(path);
        if (!is)
            return fail(MIXLAB_IO_ERROR, std::string("cannot open config ") + path);
        mixlab::ExperimentConfig merged = cfg->cfg;
        merged.load(is);
        cfg->cfg = std::move(merged);
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_config_set(mixlab_config* cfg, const char* key, const char* value)
{
    MIXLAB_REQUIRE(cfg && key && value, "mixlab_config_set: null argument");
    return guarded([&] {
        cfg->cfg.set(key, value);
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_config_dump(const mixlab_config* cfg, char* buf, size_t len, size_t* needed)
{
    MIXLAB_REQUIRE(cfg, "mixlab_config_dump: null config");
    return guarded([&] {
        const std::string text = cfg->cfg.to_key_value();
        if (needed)
            *needed = text.size() + 1;
        if (!buf)
            return MIXLAB_OK;
        if (len < text.size() + 1)
            return fail(MIXLAB_INVALID_ARGUMENT, "mixlab_config_dump: buffer too small");
        std::memcpy(buf, text.c_str(), text.size() + 1);
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_config_validate(const mixlab_config* cfg)
{
    MIXLAB_REQUIRE(cfg, "mixlab_config_validate: null config");
    return guarded([&] {
        cfg->cfg.validate();
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_solve(const mixlab_config* cfg, const char* solution_path, const char* history_path)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_solve: null config");
    return guarded([&] {
        Output sol(solution_path, true);
        Output hist(history_path, false);
        const mixlab::SemilinearResult r = mixlab::run_solve(cfg->cfg, *sol, hist.get());
        if (!r.converged)
            return fail(MIXLAB_NUMERIC_FAILURE, "solve_semilinear did not converge",
                        mixlab::failure_line("solve_semilinear", std::string(to_string(r.status)), r.residual_sup));
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_eig(const mixlab_config* cfg, const char* out_path, const char* eigenfunction_path)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_eig: null config");
    return guarded([&] {
        Output out(out_path, true);
        Output phi(eigenfunction_path, false);
        mixlab::run_eig(cfg->cfg, *out, phi.get());
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_moser(const mixlab_config* cfg, const char* out_path)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_moser: null config");
    return guarded([&] {
        Output out(out_path, true);
        mixlab::run_moser(cfg->cfg, *out);
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_regularity(const mixlab_config* cfg, const char* out_path, const char* report_path)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_regularity: null config");
    return guarded([&] {
        Output out(out_path, true);
        Output rep(report_path, false);
        mixlab::run_regularity(cfg->cfg, *out, rep.get());
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_maxprinciple(const mixlab_config* cfg, const char* out_path, const char** verdict)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_maxprinciple: null config");
    return guarded([&] {
        const mixlab::MaxPrincipleResult r = mixlab::run_max_principle_check(cfg->cfg);
        Output out(out_path, true);
        *out << "verdict,min_u,max_u,required_margin,min_g_sampled,message\n";
        *out << to_string(r.verdict) << ',' << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}", r.min_u, r.max_u,
                                                            r.required_margin, r.min_g_sampled)
             << ",\"" << r.message << "\"\n";
        if (verdict)
            *verdict = to_string(r.verdict).data();
        switch (r.verdict) {
        case mixlab::MaxPrincipleVerdict::pass:
        case mixlab::MaxPrincipleVerdict::vacuous:
            return MIXLAB_OK;
        case mixlab::MaxPrincipleVerdict::fail:
            return fail(MIXLAB_CHECK_FAILED, r.message);
        case mixlab::MaxPrincipleVerdict::rejected:
            return fail(MIXLAB_INVALID_ARGUMENT, r.message);
        }
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_run_suite(const mixlab_config* cfg, const char* summary_path, int* exit_code)
{
    MIXLAB_REQUIRE(cfg, "mixlab_run_suite: null config");
    return guarded([&] {
        Output out(summary_path, true);
        const mixlab::SuiteResult r = mixlab::run_suite(cfg->cfg, *out);
        if (exit_code)
            *exit_code = static_cast<int>(r.exit_code);
        for (const auto& c : r.checks)
            if (c.verdict == mixlab::Verdict::error && c.detail.rfind("FAIL ", 0) == 0) {
                last_failure = c.detail;
                break;
            }
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_operator_create(double a, double b, size_t n, double s, double t, mixlab_normalization norm,
                                     mixlab_operator** out)
{
    MIXLAB_REQUIRE(out, "mixlab_operator_create: null output pointer");
    MIXLAB_REQUIRE(norm == MIXLAB_NORMALIZATION_STANDARD || norm == MIXLAB_NORMALIZATION_UNIT,
                   "mixlab_operator_create: unknown normalization");
    return guarded([&] {
        const auto grid = mixlab::Grid::build(a, b, n);
        const mixlab::FractionalOrder order(s, norm == MIXLAB_NORMALIZATION_UNIT ? mixlab::Normalization::unit
                                                                                  : mixlab::Normalization::standard);
        *out = new mixlab_operator{mixlab::assemble_mixed(grid, order, t)};
        return MIXLAB_OK;
    });
}

void mixlab_operator_destroy(mixlab_operator* op) { delete op; }

mixlab_status mixlab_operator_size(const mixlab_operator* op, size_t* n)
{
    MIXLAB_REQUIRE(op && n, "mixlab_operator_size: null argument");
    *n = op->op.size();
    return MIXLAB_OK;
}

mixlab_status mixlab_operator_apply(const mixlab_operator* op, const double* u, double* out)
{
    MIXLAB_REQUIRE(op && u && out, "mixlab_operator_apply: null argument");
    return guarded([&] {
        const std::size_t n = op->op.size();
        op->op.apply(std::span<const double>(u, n), std::span<double>(out, n));
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_operator_solve(const mixlab_operator* op, const double* f, double tol, double* u)
{
    MIXLAB_REQUIRE(op && f && u, "mixlab_operator_solve: null argument");
    return guarded([&] {
        const std::size_t n = op->op.size();
        mixlab::SolveConfig cfg;
        cfg.cg_tol = tol;
        cfg.validate();
        const auto r = mixlab::solve_linear_detailed(op->op, std::span<const double>(f, n), cfg);
        std::copy(r.x.begin(), r.x.end(), u);
        return MIXLAB_OK;
    });
}

mixlab_status mixlab_operator_eigen(const mixlab_operator* op, double tol, double* lambda1, double* lambda2,
                                    double* phi1)
{
    MIXLAB_REQUIRE(op && lambda1 && lambda2, "mixlab_operator_eigen: null argument");
    return guarded([&] {
        const mixlab::EigenGap gap = mixlab::eigengap(op->op, tol);
        *lambda1 = gap.lambda1;
        *lambda2 = gap.lambda2;
        if (phi1)
            std::copy(gap.phi1->values().begin(), gap.phi1->values().end(), phi1);
        return MIXLAB_OK;
    });
}

} // extern "C"
