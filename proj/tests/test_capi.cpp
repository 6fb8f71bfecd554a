// Exercises the shared library through mixlab.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mixlab/mixlab.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Config {
    mixlab_config* raw = nullptr;
    Config() { REQUIRE(mixlab_config_create(&raw) == MIXLAB_OK); }
    ~Config() { mixlab_config_destroy(raw); }
    mixlab_status set(const char* k, const char* v) { return mixlab_config_set(raw, k, v); }
};

struct Operator {
    mixlab_operator* raw = nullptr;
    ~Operator() { mixlab_operator_destroy(raw); }
};

std::string first_line(const fs::path& p)
{
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);
    return line;
}

} // namespace

TEST_CASE("version and error state")
{
    CHECK(std::string(mixlab_version()) == "1.0.0");
    Config c;
    CHECK(c.set("nonsense", "1") == MIXLAB_INVALID_ARGUMENT);
    CHECK(std::string(mixlab_last_error()).find("nonsense") != std::string::npos);
    CHECK(c.set("n", "31") == MIXLAB_OK);
    CHECK(mixlab_config_create(nullptr) == MIXLAB_INVALID_ARGUMENT);
    mixlab_config_destroy(nullptr);
    mixlab_operator_destroy(nullptr);
}

TEST_CASE("config dump and load")
{
    Config c;
    REQUIRE(c.set("n", "47") == MIXLAB_OK);
    REQUIRE(c.set("g", "1 + x") == MIXLAB_OK);
    std::size_t needed = 0;
    CHECK(mixlab_config_dump(c.raw, nullptr, 0, &needed) == MIXLAB_OK);
    REQUIRE(needed > 1);
    std::vector<char> buf(needed);
    REQUIRE(mixlab_config_dump(c.raw, buf.data(), buf.size(), &needed) == MIXLAB_OK);
    const std::string text(buf.data());
    CHECK(text.find("n=47") != std::string::npos);
    CHECK(text.find("g=1 + x") != std::string::npos);

    const fs::path path = fs::temp_directory_path() / "mixlab_capi.cfg";
    {
        std::ofstream os(path);
        os << text;
    }
    Config d;
    REQUIRE(mixlab_config_load(d.raw, path.c_str()) == MIXLAB_OK);
    std::vector<char> buf2(needed);
    REQUIRE(mixlab_config_dump(d.raw, buf2.data(), buf2.size(), &needed) == MIXLAB_OK);
    CHECK(std::string(buf2.data()) == text);
    CHECK(mixlab_config_load(d.raw, "/nonexistent/file.cfg") == MIXLAB_IO_ERROR);

    REQUIRE(d.set("s", "1.5") == MIXLAB_OK);
    CHECK(mixlab_config_validate(d.raw) == MIXLAB_INVALID_ARGUMENT);
}

TEST_CASE("commands write their CSV files")
{
    const fs::path dir = fs::temp_directory_path() / "mixlab_capi_cmd";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Config c;
    REQUIRE(c.set("n", "31") == MIXLAB_OK);
    REQUIRE(mixlab_run_solve(c.raw, (dir / "u.csv").c_str(), (dir / "h.csv").c_str()) == MIXLAB_OK);
    CHECK(first_line(dir / "u.csv") == "x,u");
    CHECK(first_line(dir / "h.csv") == "iter,residual");
    REQUIRE(mixlab_run_eig(c.raw, (dir / "e.csv").c_str(), nullptr) == MIXLAB_OK);
    CHECK(first_line(dir / "e.csv") == "s,t,n,lambda1,lambda2,residual");
    REQUIRE(mixlab_run_moser(c.raw, (dir / "m.csv").c_str()) == MIXLAB_OK);
    CHECK(first_line(dir / "m.csv") == "m,beta,A");
    REQUIRE(mixlab_run_regularity(c.raw, (dir / "r.csv").c_str(), (dir / "r.txt").c_str()) == MIXLAB_OK);
    CHECK(first_line(dir / "r.csv") == "alpha,level,quotient,flag");

    const char* verdict = nullptr;
    CHECK(mixlab_run_maxprinciple(c.raw, (dir / "mp.csv").c_str(), &verdict) == MIXLAB_OK);
    CHECK(std::string(verdict) == "pass");
    REQUIRE(c.set("g", "x - 1") == MIXLAB_OK);
    CHECK(mixlab_run_maxprinciple(c.raw, (dir / "mp.csv").c_str(), &verdict) == MIXLAB_INVALID_ARGUMENT);
    CHECK(std::string(verdict) == "rejected");

    CHECK(mixlab_run_solve(c.raw, "/nonexistent/dir/u.csv", nullptr) == MIXLAB_IO_ERROR);
}

TEST_CASE("numeric failure carries a FAIL line")
{
    Config c;
    REQUIRE(c.set("n", "200") == MIXLAB_OK);
    REQUIRE(c.set("cg_max_iter", "2") == MIXLAB_OK);
    const fs::path out = fs::temp_directory_path() / "mixlab_capi_fail.csv";
    CHECK(mixlab_run_solve(c.raw, out.c_str(), nullptr) == MIXLAB_NUMERIC_FAILURE);
    const std::string line = mixlab_last_failure_line();
    CHECK(line.rfind("FAIL ", 0) == 0);
}

TEST_CASE("suite through the C API")
{
    const fs::path dir = fs::temp_directory_path() / "mixlab_capi_suite";
    fs::remove_all(dir);
    fs::create_directories(dir);
    Config c;
    REQUIRE(c.set("n", "63") == MIXLAB_OK);
    REQUIRE(c.set("output_dir", dir.c_str()) == MIXLAB_OK);
    REQUIRE(c.set("suite", "truncation") == MIXLAB_OK);
    int code = -1;
    REQUIRE(mixlab_run_suite(c.raw, (dir / "summary.csv").c_str(), &code) == MIXLAB_OK);
    CHECK(code == 0);
    CHECK(first_line(dir / "summary.csv").rfind("# generated ", 0) == 0);
    REQUIRE(c.set("suite", "bogus") == MIXLAB_OK);
    CHECK(mixlab_run_suite(c.raw, nullptr, &code) == MIXLAB_INVALID_ARGUMENT);
    CHECK(std::string(mixlab_last_error()).find("norms") != std::string::npos);
}

TEST_CASE("operator handle")
{
    Operator op;
    REQUIRE(mixlab_operator_create(0.0, 1.0, 63, 0.5, 0.0, MIXLAB_NORMALIZATION_STANDARD, &op.raw) == MIXLAB_OK);
    std::size_t n = 0;
    REQUIRE(mixlab_operator_size(op.raw, &n) == MIXLAB_OK);
    REQUIRE(n == 63);
    std::vector<double> u(n), au(n), f(n, 1.0), sol(n), phi(n);
    const double h = 1.0 / 64.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (i + 1) * h;
        u[i] = x * (1 - x);
    }
    REQUIRE(mixlab_operator_apply(op.raw, u.data(), au.data()) == MIXLAB_OK);
    for (double v : au)
        CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
    REQUIRE(mixlab_operator_solve(op.raw, f.data(), 1e-12, sol.data()) == MIXLAB_OK);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(sol[i] == doctest::Approx(u[i] / 2).epsilon(1e-9));
    double l1 = 0, l2 = 0;
    REQUIRE(mixlab_operator_eigen(op.raw, 1e-10, &l1, &l2, phi.data()) == MIXLAB_OK);
    CHECK(l1 == doctest::Approx(2 / (h * h) * (1 - std::cos(M_PI * h))).epsilon(1e-9));
    CHECK(l2 > l1);
    for (double v : phi)
        CHECK(v > 0.0);

    mixlab_operator* bad = nullptr;
    CHECK(mixlab_operator_create(0.0, 1.0, 10, 1.5, 1.0, MIXLAB_NORMALIZATION_STANDARD, &bad) ==
          MIXLAB_INVALID_ARGUMENT);
    CHECK(bad == nullptr);
    CHECK(mixlab_operator_create(0.0, 1.0, 10, 0.5, 2.0, MIXLAB_NORMALIZATION_UNIT, &bad) == MIXLAB_INVALID_ARGUMENT);
    CHECK(mixlab_operator_apply(nullptr, u.data(), au.data()) == MIXLAB_INVALID_ARGUMENT);
}
