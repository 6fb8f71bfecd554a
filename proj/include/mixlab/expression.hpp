#ifndef MIXLAB_EXPRESSION_HPP
#define MIXLAB_EXPRESSION_HPP

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mixlab {

/// Syntax error; offset is the byte position in the source text.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::invalid_argument(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression in the variables x and u, e.g. "1 + abs(u)^0.5" or "sin(pi*x)".
///
/// Grammar (^ is right-associative and binds tighter than unary minus):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | x | u | pi | e | func '(' args ')' | '(' expr ')'
class Expression {
public:
    enum class Kind { number, var_x, var_u, neg, add, sub, mul, div, pow, call };

    struct Node {
        Kind kind = Kind::number;
        double number = 0.0;
        std::string function; ///< for calls
        std::vector<std::shared_ptr<const Node>> children;
    };

    static Expression parse(std::string_view text);

    /// Throws EvaluationError on domain errors and non-finite results.
    double evaluate(double x, double u) const;

    /// Fully parenthesized text that parses back to an equal tree.
    std::string to_string() const;

    bool depends_on_u() const noexcept;

    const Node& root() const noexcept { return *root_; }

    friend bool operator==(const Expression& l, const Expression& r) noexcept;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

bool operator==(const Expression::Node& l, const Expression::Node& r) noexcept;

} // namespace mixlab

#endif // MIXLAB_EXPRESSION_HPP
