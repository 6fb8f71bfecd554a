// mixlab command-line front end. Talks to the library only through mixlab.h.
#include "mixlab/mixlab.h"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

struct ConfigDeleter {
    void operator()(mixlab_config* c) const { mixlab_config_destroy(c); }
};

const std::vector<std::string> config_keys{
    "a",          "b",       "n",          "s",           "t",              "normalization",
    "g",          "f",       "suite",      "output_dir",  "seed",           "cg_tol",
    "cg_max_iter", "picard_damping", "picard_tol", "picard_max_iter", "newton_switch_tol", "use_newton",
    "two_star",   "two_star_s", "m_max",   "fit_fraction",
};

std::string flag_name(const std::string& key)
{
    std::string out = "--" + key;
    for (char& c : out)
        if (c == '_')
            c = '-';
    return out;
}

int exit_code_for(mixlab_status st)
{
    switch (st) {
    case MIXLAB_OK:
        return 0;
    case MIXLAB_CHECK_FAILED:
        return 1;
    case MIXLAB_INVALID_ARGUMENT:
    case MIXLAB_IO_ERROR:
        return 2;
    default:
        return 3;
    }
}

int report(mixlab_status st)
{
    if (st == MIXLAB_OK)
        return 0;
    const std::string line = mixlab_last_failure_line();
    if (!line.empty())
        std::fprintf(stderr, "%s\n", line.c_str());
    std::fprintf(stderr, "error: %s\n", mixlab_last_error());
    return exit_code_for(st);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical lab for the mixed operator -Laplacian + fractional Laplacian in 1-D"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", mixlab_version());

    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
    std::map<std::string, std::string> overrides;
    for (const auto& key : config_keys)
        app.add_option(flag_name(key), overrides[key], "override config key '" + key + "'");

    std::string out, extra;
    auto* solve = app.add_subcommand("solve", "solve the semilinear problem; CSV x,u");
    solve->add_option("--out", out, "solution CSV (default stdout)");
    solve->add_option("--history", extra, "residual history CSV iter,residual");

    auto* eig = app.add_subcommand("eig", "principal eigenvalue and gap; CSV s,t,n,lambda1,lambda2,residual");
    eig->add_option("--out", out, "output CSV (default stdout)");
    eig->add_option("--eigenfunction", extra, "principal eigenfunction CSV x,u");

    auto* moser = app.add_subcommand("moser", "Moser iterates of the solution; CSV m,beta,A");
    moser->add_option("--out", out, "output CSV (default stdout)");

    auto* regularity = app.add_subcommand("regularity", "gradient Hoelder flags; CSV alpha,level,quotient,flag");
    regularity->add_option("--out", out, "output CSV (default stdout)");
    regularity->add_option("--report", extra, "key=value report including the boundary fit");

    auto* maxp = app.add_subcommand("maxprinciple", "strong maximum principle check");
    maxp->add_option("--out", out, "output CSV (default stdout)");

    std::string suite;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", suite, "suite name or 'all'")->required();
    verify->add_option("--summary", out, "summary report (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    mixlab_config* raw = nullptr;
    if (mixlab_config_create(&raw) != MIXLAB_OK)
        return report(MIXLAB_INTERNAL_ERROR);
    std::unique_ptr<mixlab_config, ConfigDeleter> cfg(raw);

    if (!config_path.empty())
        if (auto st = mixlab_config_load(cfg.get(), config_path.c_str()); st != MIXLAB_OK)
            return report(st);
    for (const auto& key : config_keys)
        if (app.count(flag_name(key)) > 0)
            if (auto st = mixlab_config_set(cfg.get(), key.c_str(), overrides[key].c_str()); st != MIXLAB_OK)
                return report(st);
    if (*verify)
        if (auto st = mixlab_config_set(cfg.get(), "suite", suite.c_str()); st != MIXLAB_OK)
            return report(st);

    if (*solve)
        return report(mixlab_run_solve(cfg.get(), opt(out), opt(extra)));
    if (*eig)
        return report(mixlab_run_eig(cfg.get(), opt(out), opt(extra)));
    if (*moser)
        return report(mixlab_run_moser(cfg.get(), opt(out)));
    if (*regularity)
        return report(mixlab_run_regularity(cfg.get(), opt(out), opt(extra)));
    if (*maxp) {
        const char* verdict = nullptr;
        const mixlab_status st = mixlab_run_maxprinciple(cfg.get(), opt(out), &verdict);
        if (verdict)
            std::fprintf(stderr, "maxprinciple: %s\n", verdict);
        return report(st);
    }
    int code = 0;
    if (auto st = mixlab_run_suite(cfg.get(), opt(out), &code); st != MIXLAB_OK)
        return report(st);
    if (code == 3 && *mixlab_last_failure_line())
        std::fprintf(stderr, "%s\n", mixlab_last_failure_line());
    return code;
}
