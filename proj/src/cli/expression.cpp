#include "ricci_dynamo/cli/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace ricci_dynamo::cli {

struct Expression::Node {
    enum class Kind { Number, X, Y, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };
    Kind kind;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double x, double y) const {
        switch (kind) {
            case Kind::Number: return value;
            case Kind::X: return x;
            case Kind::Y: return y;
            case Kind::Add: return args[0]->eval(x, y) + args[1]->eval(x, y);
            case Kind::Sub: return args[0]->eval(x, y) - args[1]->eval(x, y);
            case Kind::Mul: return args[0]->eval(x, y) * args[1]->eval(x, y);
            case Kind::Div: return args[0]->eval(x, y) / args[1]->eval(x, y);
            case Kind::Neg: return -args[0]->eval(x, y);
            case Kind::Sin: return std::sin(args[0]->eval(x, y));
            case Kind::Cos: return std::cos(args[0]->eval(x, y));
            case Kind::Exp: return std::exp(args[0]->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args = {}, double value = 0.0) {
    return std::make_shared<const Expression::Node>(Expression::Node{kind, value, std::move(args)});
}

// Recursive descent:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := number | x | y | pi | func '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression '" + s_ + "' at position " + std::to_string(pos_) + ": " + what);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Kind::Add, {lhs, term()});
            else if (accept('-')) lhs = make(Kind::Sub, {lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Kind::Mul, {lhs, unary()});
            else if (accept('/')) lhs = make(Kind::Div, {lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Kind::Neg, {unary()});
        if (accept('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos_ += used;
            return make(Kind::Number, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return make(Kind::X);
            if (name == "y") return make(Kind::Y);
            if (name == "pi") return make(Kind::Number, {}, std::numbers::pi);
            Kind fn;
            if (name == "sin") fn = Kind::Sin;
            else if (name == "cos") fn = Kind::Cos;
            else if (name == "exp") fn = Kind::Exp;
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(fn, {arg});
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

Expression::Expression(std::string text, std::shared_ptr<const Node> root)
    : text_(std::move(text)), root_(std::move(root)) {}

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    NodePtr root = p.parse();
    return Expression(text, std::move(root));
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

} // namespace ricci_dynamo::cli
