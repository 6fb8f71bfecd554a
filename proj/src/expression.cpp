#include "mixlab/expression.hpp"

#include "mixlab/error.hpp"

#include <fmt/format.h>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace mixlab {

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Expression::Kind;

struct FunctionInfo {
    std::string_view name;
    std::size_t arity;
};

constexpr std::array<FunctionInfo, 8> functions{{
    {"abs", 1}, {"sin", 1}, {"cos", 1}, {"exp", 1}, {"log", 1}, {"sqrt", 1}, {"min", 2}, {"max", 2},
}};

const FunctionInfo* find_function(std::string_view name)
{
    for (const auto& f : functions)
        if (f.name == name)
            return &f;
    return nullptr;
}

NodePtr make(Kind kind, std::vector<NodePtr> children = {}, double number = 0.0, std::string fn = {})
{
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->number = number;
    n->function = std::move(fn);
    n->children = std::move(children);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse()
    {
        NodePtr e = expr();
        skip_space();
        if (pos_ != text_.size())
            throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
        return e;
    }

private:
    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ >= text_.size())
                throw ParseError(fmt::format("expected '{}' but reached end of input", c), pos_);
            throw ParseError(fmt::format("expected '{}'", c), pos_);
        }
    }

    NodePtr expr()
    {
        NodePtr lhs = term();
        while (true) {
            if (accept('+'))
                lhs = make(Kind::add, {lhs, term()});
            else if (accept('-'))
                lhs = make(Kind::sub, {lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term()
    {
        NodePtr lhs = unary();
        while (true) {
            if (accept('*'))
                lhs = make(Kind::mul, {lhs, unary()});
            else if (accept('/'))
                lhs = make(Kind::div, {lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-'))
            return make(Kind::neg, {unary()});
        return power();
    }

    NodePtr power()
    {
        NodePtr base = atom();
        if (accept('^'))
            return make(Kind::pow, {base, unary()});
        return base;
    }

    NodePtr atom()
    {
        skip_space();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        throw ParseError(fmt::format("unexpected '{}'", c), pos_);
    }

    NodePtr number()
    {
        const std::size_t start = pos_;
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc())
            throw ParseError("malformed number", start);
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return make(Kind::number, {}, value);
    }

    NodePtr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x")
            return make(Kind::var_x);
        if (name == "u")
            return make(Kind::var_u);
        if (name == "pi")
            return make(Kind::number, {}, std::numbers::pi);
        if (name == "e")
            return make(Kind::number, {}, std::numbers::e);
        const FunctionInfo* fn = find_function(name);
        if (!fn)
            throw ParseError(fmt::format("unknown identifier '{}'", name), start);
        expect('(');
        std::vector<NodePtr> args{expr()};
        while (accept(','))
            args.push_back(expr());
        expect(')');
        if (args.size() != fn->arity)
            throw ParseError(fmt::format("{} takes {} argument(s), got {}", name, fn->arity, args.size()), start);
        return make(Kind::call, std::move(args), 0.0, std::string(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double checked(double v, const char* what)
{
    if (!std::isfinite(v))
        throw EvaluationError(fmt::format("{} produced a non-finite value", what));
    return v;
}

double eval(const Node& n, double x, double u)
{
    switch (n.kind) {
    case Kind::number:
        return n.number;
    case Kind::var_x:
        return x;
    case Kind::var_u:
        return u;
    case Kind::neg:
        return -eval(*n.children[0], x, u);
    case Kind::add:
        return checked(eval(*n.children[0], x, u) + eval(*n.children[1], x, u), "addition");
    case Kind::sub:
        return checked(eval(*n.children[0], x, u) - eval(*n.children[1], x, u), "subtraction");
    case Kind::mul:
        return checked(eval(*n.children[0], x, u) * eval(*n.children[1], x, u), "multiplication");
    case Kind::div: {
        const double d = eval(*n.children[1], x, u);
        if (d == 0.0)
            throw EvaluationError("division by zero");
        return checked(eval(*n.children[0], x, u) / d, "division");
    }
    case Kind::pow: {
        const double b = eval(*n.children[0], x, u);
        const double p = eval(*n.children[1], x, u);
        if (b < 0.0 && p != std::trunc(p))
            throw EvaluationError(fmt::format("negative base {} raised to non-integer power {}", b, p));
        if (b == 0.0 && p < 0.0)
            throw EvaluationError("zero raised to a negative power");
        return checked(std::pow(b, p), "power");
    }
    case Kind::call: {
        const double a = eval(*n.children[0], x, u);
        const std::string& f = n.function;
        if (f == "abs")
            return std::abs(a);
        if (f == "sin")
            return std::sin(a);
        if (f == "cos")
            return std::cos(a);
        if (f == "exp")
            return checked(std::exp(a), "exp");
        if (f == "log") {
            if (!(a > 0.0))
                throw EvaluationError(fmt::format("log of nonpositive value {}", a));
            return std::log(a);
        }
        if (f == "sqrt") {
            if (a < 0.0)
                throw EvaluationError(fmt::format("sqrt of negative value {}", a));
            return std::sqrt(a);
        }
        const double b = eval(*n.children[1], x, u);
        return f == "min" ? std::min(a, b) : std::max(a, b);
    }
    }
    throw EvaluationError("corrupt expression tree");
}

void print(const Node& n, std::string& out)
{
    auto binary = [&](const char* op) {
        out += '(';
        print(*n.children[0], out);
        out += op;
        print(*n.children[1], out);
        out += ')';
    };
    switch (n.kind) {
    case Kind::number:
        // Shortest round-trip form; negative literals never occur in parsed trees.
        out += fmt::format("{}", n.number);
        break;
    case Kind::var_x:
        out += 'x';
        break;
    case Kind::var_u:
        out += 'u';
        break;
    case Kind::neg:
        out += "(-";
        print(*n.children[0], out);
        out += ')';
        break;
    case Kind::add:
        binary(" + ");
        break;
    case Kind::sub:
        binary(" - ");
        break;
    case Kind::mul:
        binary(" * ");
        break;
    case Kind::div:
        binary(" / ");
        break;
    case Kind::pow:
        binary("^");
        break;
    case Kind::call:
        out += n.function;
        out += '(';
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i)
                out += ", ";
            print(*n.children[i], out);
        }
        out += ')';
        break;
    }
}

bool uses_u(const Node& n)
{
    if (n.kind == Kind::var_u)
        return true;
    for (const auto& c : n.children)
        if (uses_u(*c))
            return true;
    return false;
}

} // namespace

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

double Expression::evaluate(double x, double u) const { return checked(eval(*root_, x, u), "expression"); }

std::string Expression::to_string() const
{
    std::string out;
    print(*root_, out);
    return out;
}

bool Expression::depends_on_u() const noexcept { return uses_u(*root_); }

bool operator==(const Expression::Node& l, const Expression::Node& r) noexcept
{
    if (l.kind != r.kind || l.children.size() != r.children.size())
        return false;
    if (l.kind == Kind::number && l.number != r.number)
        return false;
    if (l.kind == Kind::call && l.function != r.function)
        return false;
    for (std::size_t i = 0; i < l.children.size(); ++i)
        if (!(*l.children[i] == *r.children[i]))
            return false;
    return true;
}

bool operator==(const Expression& l, const Expression& r) noexcept { return *l.root_ == *r.root_; }

} // namespace mixlab
