#ifndef MIXLAB_ERROR_HPP
#define MIXLAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixlab {

/// Bad input: violated preconditions, malformed configuration, grid mismatch.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string op, std::string reason, double residual,
                     std::vector<double> history = {})
        : std::runtime_error(op + ": " + reason), op_(std::move(op)),
          reason_(std::move(reason)), residual_(residual),
          history_(std::move(history)) {}

    const std::string& op() const noexcept { return op_; }
    const std::string& reason() const noexcept { return reason_; }
    double residual() const noexcept { return residual_; }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::string op_;
    std::string reason_;
    double residual_;
    std::vector<double> history_;
};

/// CG met a direction with nonpositive curvature.
class NotPositiveDefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Domain error while evaluating a user expression (log of nonpositive, x/0, ...).
class EvaluationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace mixlab

#endif // MIXLAB_ERROR_HPP
