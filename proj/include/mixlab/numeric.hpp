#ifndef MIXLAB_NUMERIC_HPP
#define MIXLAB_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <span>

namespace mixlab {

/// Neumaier-compensated accumulator. Sums are independent of the magnitude
/// ordering of terms up to O(eps) relative, which keeps reductions stable
/// when rows are split across threads.
class CompensatedSum {
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) noexcept
    {
        add(v);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> v) noexcept
{
    CompensatedSum acc;
    for (double x : v)
        acc += x;
    return acc.value();
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    CompensatedSum acc;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc.value();
}

inline double max_abs(std::span<const double> v) noexcept
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

/// Number of worker threads, honoring MIXLAB_THREADS (0 or unset = auto).
int thread_count();

} // namespace mixlab

#endif // MIXLAB_NUMERIC_HPP
