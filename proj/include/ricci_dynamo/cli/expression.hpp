#pragma once

#include <memory>
#include <string>

#include "ricci_dynamo/errors.hpp"

namespace ricci_dynamo::cli {

class ExpressionError : public Error {
public:
    using Error::Error;
};

/// Arithmetic expression over x and y: + - * /, unary minus, parentheses,
/// sin, cos, exp, numeric literals and pi.
class Expression {
public:
    /// Throws ExpressionError naming the offending position.
    static Expression parse(const std::string& text);

    double operator()(double x, double y) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    Expression(std::string text, std::shared_ptr<const Node> root);

    std::string text_;
    std::shared_ptr<const Node> root_;
};

} // namespace ricci_dynamo::cli
