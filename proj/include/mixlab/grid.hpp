#ifndef MIXLAB_GRID_HPP
#define MIXLAB_GRID_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mixlab {

/// Uniform 1-D mesh of (a, b) with n interior nodes x_i = a + i*h, i = 1..n.
/// The boundary nodes x_0 = a and x_{n+1} = b, and everything outside (a, b),
/// carry the value 0. Interior nodes are addressed 0-based in code.
class Grid {
public:
    static Grid build(double a, double b, std::size_t n);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    std::size_t n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double length() const noexcept { return b_ - a_; }

    /// Position of interior node i (0-based, so node(0) = a + h).
    double node(std::size_t i) const noexcept { return a_ + static_cast<double>(i + 1) * h_; }
    /// min(x_i - a, b - x_i), always > 0.
    double boundary_distance(std::size_t i) const noexcept;
    std::vector<double> nodes() const;

    bool contains(double x) const noexcept { return x > a_ && x < b_; }

    friend bool operator==(const Grid& l, const Grid& r) noexcept
    {
        return l.a_ == r.a_ && l.b_ == r.b_ && l.n_ == r.n_;
    }

private:
    Grid(double a, double b, std::size_t n);

    double a_;
    double b_;
    std::size_t n_;
    double h_;
};

/// Real values on the interior nodes of a grid; identically zero elsewhere.
class GridFunction {
public:
    explicit GridFunction(const Grid& grid);
    GridFunction(const Grid& grid, std::vector<double> values);

    static GridFunction sample(const Grid& grid, const std::function<double(double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    /// Piecewise-linear interpolant through (a, 0), the interior nodes, (b, 0);
    /// exactly 0 for x outside (a, b).
    double evaluate(double x) const noexcept;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double c) noexcept;

private:
    Grid grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction l, const GridFunction& r);
GridFunction operator-(GridFunction l, const GridFunction& r);
GridFunction operator*(double c, GridFunction u);

/// Throws InvalidArgument unless both functions live on the same grid.
void require_same_grid(const Grid& l, const Grid& r, const char* op);

/// CSV with header `x,u`, one row per interior node, 17 significant digits.
void write_csv(std::ostream& os, const GridFunction& u);
std::string to_csv(const GridFunction& u);
/// Parses the format produced by write_csv; nodes must form a uniform grid.
GridFunction read_csv(std::istream& is);

} // namespace mixlab

#endif // MIXLAB_GRID_HPP
