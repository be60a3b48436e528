#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pullin/grid.hpp"

namespace pullin {

/// Parse failure with a 1-based column into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int column)
        : std::runtime_error(message + " (column " + std::to_string(column) + ")"),
          column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

/// Evaluation failure (missing variable or a domain error such as log of a
/// non-positive value); carries the column of the offending node.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& message, int column)
        : std::runtime_error(message + " (column " + std::to_string(column) + ")"),
          column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

/// Coordinates supplied to evaluation. Interval grids expose the coordinate
/// as both x and r; radial grids expose r; rectangles expose x and y.
struct EvalPoint {
    std::optional<double> x;
    std::optional<double> y;
    std::optional<double> r;
};

namespace detail {
struct ExprNode;
}

/// Immutable expression over x, y, r, pi, + - * /, unary -, ^ with constant
/// exponent, and sin/cos/exp/log/sqrt.
class Expr {
public:
    double evaluate(const EvalPoint& point) const;
    std::string print() const;
    const std::set<std::string>& variables() const { return variables_; }

    friend Expr parse_expression(const std::string& text);

private:
    Expr() = default;
    std::shared_ptr<const detail::ExprNode> root_;
    std::set<std::string> variables_;
};

Expr parse_expression(const std::string& text);

/// True when every variable used by `e` is legal for the grid kind
/// (r on interval/radial grids, x on interval grids, x/y on rectangles).
bool variables_legal_for(const Expr& e, GridKind kind, int axis_count,
                         std::string* offending = nullptr);

/// Nodewise sampling onto a grid.
Field sample(const Grid& grid, const Expr& e);
VectorField sample_vector(const Grid& grid, std::span<const Expr> components);

}  // namespace pullin
