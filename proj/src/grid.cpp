#include "mixlab/grid.hpp"

#include "mixlab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace mixlab {

Grid::Grid(double a, double b, std::size_t n)
    : a_(a), b_(b), n_(n), h_((b - a) / static_cast<double>(n + 1))
{
}

Grid Grid::build(double a, double b, std::size_t n)
{
    if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
        throw InvalidArgument(fmt::format("build_grid: need finite a < b, got a={} b={}", a, b));
    if (n == 0)
        throw InvalidArgument("build_grid: need at least one interior node");
    return Grid(a, b, n);
}

double Grid::boundary_distance(std::size_t i) const noexcept
{
    // Index arithmetic instead of node differences keeps d exact for symmetric nodes.
    const std::size_t left = i + 1;
    const std::size_t right = n_ - i;
    return static_cast<double>(std::min(left, right)) * h_;
}

std::vector<double> Grid::nodes() const
{
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i)
        x[i] = node(i);
    return x;
}

void require_same_grid(const Grid& l, const Grid& r, const char* op)
{
    if (!(l == r))
        throw InvalidArgument(fmt::format("{}: grid mismatch (n={} vs n={})", op, l.n(), r.n()));
}

GridFunction::GridFunction(const Grid& grid) : grid_(grid), values_(grid.n(), 0.0) {}

GridFunction::GridFunction(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.n())
        throw InvalidArgument(fmt::format("GridFunction: {} values for a grid with {} nodes",
                                          values_.size(), grid_.n()));
}

GridFunction GridFunction::sample(const Grid& grid, const std::function<double(double)>& f)
{
    GridFunction u(grid);
    for (std::size_t i = 0; i < grid.n(); ++i)
        u.values_[i] = f(grid.node(i));
    return u;
}

double GridFunction::evaluate(double x) const noexcept
{
    if (!grid_.contains(x))
        return 0.0;
    const double pos = (x - grid_.a()) / grid_.h(); // in (0, n+1)
    const auto cell = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(cell);
    auto at = [this](std::size_t k) { // k indexes x_0 .. x_{n+1}
        return (k == 0 || k > values_.size()) ? 0.0 : values_[k - 1];
    };
    return (1.0 - frac) * at(cell) + frac * at(cell + 1);
}

GridFunction& GridFunction::operator+=(const GridFunction& o)
{
    require_same_grid(grid_, o.grid_, "GridFunction::+=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o)
{
    require_same_grid(grid_, o.grid_, "GridFunction::-=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] -= o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double c) noexcept
{
    for (double& v : values_)
        v *= c;
    return *this;
}

GridFunction operator+(GridFunction l, const GridFunction& r) { return l += r; }
GridFunction operator-(GridFunction l, const GridFunction& r) { return l -= r; }
GridFunction operator*(double c, GridFunction u) { return u *= c; }

void write_csv(std::ostream& os, const GridFunction& u)
{
    os << "x,u\n";
    const Grid& g = u.grid();
    for (std::size_t i = 0; i < g.n(); ++i)
        os << fmt::format("{:.17g},{:.17g}\n", g.node(i), u[i]);
}

std::string to_csv(const GridFunction& u)
{
    std::ostringstream os;
    write_csv(os, u);
    return os.str();
}

GridFunction read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,u", 0) != 0)
        throw InvalidArgument("read_csv: missing `x,u` header");
    std::vector<double> xs, us;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InvalidArgument("read_csv: malformed row `" + line + "`");
        xs.push_back(std::stod(line.substr(0, comma)));
        us.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 2)
        throw InvalidArgument("read_csv: need at least two rows to recover the grid");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    Grid g = Grid::build(xs.front() - h, xs.back() + h, xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(xs[i] - g.node(i)) > 1e-9 * std::max(1.0, g.length()))
            throw InvalidArgument("read_csv: nodes are not uniformly spaced");
    return GridFunction(g, std::move(us));
}

} // namespace mixlab
