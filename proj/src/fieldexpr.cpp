#include "pullin/fieldexpr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pullin {

namespace detail {

enum class NodeKind { Number, Variable, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class FuncKind { Sin, Cos, Exp, Log, Sqrt };

struct ExprNode {
    NodeKind kind;
    int column = 0;
    double number = 0.0;        // Number, and the constant exponent for Pow
    std::string variable;       // Variable
    FuncKind func = FuncKind::Sin;
    std::shared_ptr<const ExprNode> lhs;
    std::shared_ptr<const ExprNode> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Sqrt: return "sqrt";
    }
    return "?";
}

struct Token {
    enum Kind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Kind kind;
    double value = 0.0;
    std::string text;
    int column = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        current_.column = static_cast<int>(pos_) + 1;
        if (pos_ >= text_.size()) {
            current_.kind = Token::End;
            return;
        }
        const char c = text_[pos_];
        switch (c) {
            case '+': current_.kind = Token::Plus; ++pos_; return;
            case '-': current_.kind = Token::Minus; ++pos_; return;
            case '*': current_.kind = Token::Star; ++pos_; return;
            case '/': current_.kind = Token::Slash; ++pos_; return;
            case '^': current_.kind = Token::Caret; ++pos_; return;
            case '(': current_.kind = Token::LParen; ++pos_; return;
            case ')': current_.kind = Token::RParen; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = pos_;
            while (end < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
                ++end;
            }
            if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
                size_t exp_end = end + 1;
                if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) {
                    ++exp_end;
                }
                if (exp_end < text_.size() &&
                    std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
                    end = exp_end;
                    while (end < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[end]))) {
                        ++end;
                    }
                }
            }
            const std::string num = text_.substr(pos_, end - pos_);
            try {
                current_.value = std::stod(num);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + num + "'", current_.column);
            }
            current_.kind = Token::Number;
            current_.text = num;
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
                ++end;
            }
            current_.kind = Token::Identifier;
            current_.text = text_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", current_.column);
    }

    const std::string& text_;
    size_t pos_ = 0;
    Token current_;
};

NodePtr make_node(ExprNode node) { return std::make_shared<const ExprNode>(std::move(node)); }

bool is_constant(const NodePtr& n) {
    if (!n) return true;
    if (n->kind == NodeKind::Variable) return false;
    return is_constant(n->lhs) && is_constant(n->rhs);
}

double eval_node(const ExprNode& n, const EvalPoint& p);

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) {}

    NodePtr parse() {
        NodePtr e = parse_sum();
        const Token& t = lexer_.peek();
        if (t.kind != Token::End) {
            throw ParseError("unexpected trailing input", t.column);
        }
        return e;
    }

private:
    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        while (true) {
            const Token& t = lexer_.peek();
            if (t.kind != Token::Plus && t.kind != Token::Minus) return lhs;
            const Token op = lexer_.next();
            NodePtr rhs = parse_product();
            ExprNode node;
            node.kind = op.kind == Token::Plus ? NodeKind::Add : NodeKind::Sub;
            node.column = op.column;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = make_node(std::move(node));
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        while (true) {
            const Token& t = lexer_.peek();
            if (t.kind != Token::Star && t.kind != Token::Slash) return lhs;
            const Token op = lexer_.next();
            NodePtr rhs = parse_unary();
            ExprNode node;
            node.kind = op.kind == Token::Star ? NodeKind::Mul : NodeKind::Div;
            node.column = op.column;
            node.lhs = lhs;
            node.rhs = rhs;
            lhs = make_node(std::move(node));
        }
    }

    NodePtr parse_unary() {
        const Token& t = lexer_.peek();
        if (t.kind == Token::Minus) {
            const Token op = lexer_.next();
            ExprNode node;
            node.kind = NodeKind::Neg;
            node.column = op.column;
            node.lhs = parse_unary();
            return make_node(std::move(node));
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        while (lexer_.peek().kind == Token::Caret) {
            const Token op = lexer_.next();
            // The exponent must be a constant; a leading minus and parentheses
            // are allowed, e.g. x^-2 or x^(3/2).
            NodePtr expo;
            if (lexer_.peek().kind == Token::Minus) {
                const Token neg = lexer_.next();
                ExprNode node;
                node.kind = NodeKind::Neg;
                node.column = neg.column;
                node.lhs = parse_atom();
                expo = make_node(std::move(node));
            } else {
                expo = parse_atom();
            }
            if (!is_constant(expo)) {
                throw ParseError("exponent must be a constant", op.column);
            }
            ExprNode node;
            node.kind = NodeKind::Pow;
            node.column = op.column;
            node.lhs = base;
            node.number = eval_node(*expo, EvalPoint{});
            base = make_node(std::move(node));
        }
        return base;
    }

    NodePtr parse_atom() {
        const Token t = lexer_.next();
        switch (t.kind) {
            case Token::Number: {
                ExprNode node;
                node.kind = NodeKind::Number;
                node.column = t.column;
                node.number = t.value;
                return make_node(std::move(node));
            }
            case Token::LParen: {
                NodePtr inner = parse_sum();
                const Token close = lexer_.next();
                if (close.kind != Token::RParen) {
                    throw ParseError("expected ')'", close.column);
                }
                return inner;
            }
            case Token::Identifier: {
                if (t.text == "pi") {
                    ExprNode node;
                    node.kind = NodeKind::Number;
                    node.column = t.column;
                    node.number = std::numbers::pi;
                    return make_node(std::move(node));
                }
                if (t.text == "x" || t.text == "y" || t.text == "r") {
                    ExprNode node;
                    node.kind = NodeKind::Variable;
                    node.column = t.column;
                    node.variable = t.text;
                    return make_node(std::move(node));
                }
                FuncKind func;
                if (t.text == "sin") func = FuncKind::Sin;
                else if (t.text == "cos") func = FuncKind::Cos;
                else if (t.text == "exp") func = FuncKind::Exp;
                else if (t.text == "log") func = FuncKind::Log;
                else if (t.text == "sqrt") func = FuncKind::Sqrt;
                else throw ParseError("unknown identifier '" + t.text + "'", t.column);

                const Token open = lexer_.next();
                if (open.kind != Token::LParen) {
                    throw ParseError("expected '(' after function name", open.column);
                }
                NodePtr arg = parse_sum();
                const Token close = lexer_.next();
                if (close.kind != Token::RParen) {
                    throw ParseError("expected ')'", close.column);
                }
                ExprNode node;
                node.kind = NodeKind::Call;
                node.column = t.column;
                node.func = func;
                node.lhs = arg;
                return make_node(std::move(node));
            }
            default:
                throw ParseError("expected a value", t.column);
        }
    }

    Lexer lexer_;
};

double eval_node(const ExprNode& n, const EvalPoint& p) {
    switch (n.kind) {
        case NodeKind::Number:
            return n.number;
        case NodeKind::Variable: {
            std::optional<double> v;
            if (n.variable == "x") v = p.x;
            else if (n.variable == "y") v = p.y;
            else v = p.r;
            if (!v) throw EvalError("missing variable '" + n.variable + "'", n.column);
            return *v;
        }
        case NodeKind::Add: return eval_node(*n.lhs, p) + eval_node(*n.rhs, p);
        case NodeKind::Sub: return eval_node(*n.lhs, p) - eval_node(*n.rhs, p);
        case NodeKind::Mul: return eval_node(*n.lhs, p) * eval_node(*n.rhs, p);
        case NodeKind::Div: {
            const double num = eval_node(*n.lhs, p);
            const double den = eval_node(*n.rhs, p);
            if (den == 0.0) throw EvalError("division by zero", n.column);
            return num / den;
        }
        case NodeKind::Neg: return -eval_node(*n.lhs, p);
        case NodeKind::Pow: {
            const double base = eval_node(*n.lhs, p);
            const double v = std::pow(base, n.number);
            if (!std::isfinite(v)) throw EvalError("power produced a non-finite value", n.column);
            return v;
        }
        case NodeKind::Call: {
            const double arg = eval_node(*n.lhs, p);
            double v = 0.0;
            switch (n.func) {
                case FuncKind::Sin: v = std::sin(arg); break;
                case FuncKind::Cos: v = std::cos(arg); break;
                case FuncKind::Exp: v = std::exp(arg); break;
                case FuncKind::Log:
                    if (arg <= 0.0) throw EvalError("log of a non-positive value", n.column);
                    v = std::log(arg);
                    break;
                case FuncKind::Sqrt:
                    if (arg < 0.0) throw EvalError("sqrt of a negative value", n.column);
                    v = std::sqrt(arg);
                    break;
            }
            if (!std::isfinite(v)) throw EvalError("non-finite function value", n.column);
            return v;
        }
    }
    throw EvalError("corrupt expression node", n.column);
}

int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

void print_node(const ExprNode& n, std::ostream& out);

void print_child(const ExprNode& child, int parent_prec, std::ostream& out) {
    if (precedence(child.kind) < parent_prec) {
        out << "(";
        print_node(child, out);
        out << ")";
    } else {
        print_node(child, out);
    }
}

void print_number(double v, std::ostream& out) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    std::string s = tmp.str();
    if (s.size() > 1 && s[0] == '-') {
        out << "(" << s << ")";
    } else {
        out << s;
    }
}

void print_node(const ExprNode& n, std::ostream& out) {
    switch (n.kind) {
        case NodeKind::Number: print_number(n.number, out); return;
        case NodeKind::Variable: out << n.variable; return;
        case NodeKind::Add:
            print_child(*n.lhs, 1, out);
            out << "+";
            print_child(*n.rhs, 2, out);
            return;
        case NodeKind::Sub:
            print_child(*n.lhs, 1, out);
            out << "-";
            print_child(*n.rhs, 2, out);
            return;
        case NodeKind::Mul:
            print_child(*n.lhs, 2, out);
            out << "*";
            print_child(*n.rhs, 3, out);
            return;
        case NodeKind::Div:
            print_child(*n.lhs, 2, out);
            out << "/";
            print_child(*n.rhs, 3, out);
            return;
        case NodeKind::Neg:
            out << "-";
            print_child(*n.lhs, 3, out);
            return;
        case NodeKind::Pow:
            print_child(*n.lhs, 5, out);
            out << "^";
            print_number(n.number, out);
            return;
        case NodeKind::Call:
            out << func_name(n.func) << "(";
            print_node(*n.lhs, out);
            out << ")";
            return;
    }
}

void collect_variables(const ExprNode& n, std::set<std::string>& vars) {
    if (n.kind == NodeKind::Variable) vars.insert(n.variable);
    if (n.lhs) collect_variables(*n.lhs, vars);
    if (n.rhs) collect_variables(*n.rhs, vars);
}

}  // namespace
}  // namespace detail

double Expr::evaluate(const EvalPoint& point) const {
    const double v = detail::eval_node(*root_, point);
    if (!std::isfinite(v)) throw EvalError("expression produced a non-finite value", 1);
    return v;
}

std::string Expr::print() const {
    std::ostringstream out;
    detail::print_node(*root_, out);
    return out.str();
}

Expr parse_expression(const std::string& text) {
    if (text.empty()) throw ParseError("empty expression", 1);
    detail::Parser parser(text);
    Expr e;
    e.root_ = parser.parse();
    detail::collect_variables(*e.root_, e.variables_);
    return e;
}

bool variables_legal_for(const Expr& e, GridKind kind, int axis_count,
                         std::string* offending) {
    for (const auto& v : e.variables()) {
        bool ok = false;
        switch (kind) {
            case GridKind::Interval: ok = (v == "x" || v == "r"); break;
            case GridKind::RadialBall: ok = (v == "r"); break;
            case GridKind::TensorRectangle:
                ok = (v == "x" || (v == "y" && axis_count > 1));
                break;
        }
        if (!ok) {
            if (offending) *offending = v;
            return false;
        }
    }
    return true;
}

namespace {

EvalPoint point_for(const Grid& grid, int node) {
    EvalPoint p;
    const double c0 = grid.coord(node, 0);
    switch (grid.kind()) {
        case GridKind::Interval:
            p.x = c0;
            p.r = c0;
            break;
        case GridKind::RadialBall:
            p.r = c0;
            break;
        case GridKind::TensorRectangle:
            p.x = c0;
            if (grid.axis_count() > 1) p.y = grid.coord(node, 1);
            break;
    }
    return p;
}

}  // namespace

Field sample(const Grid& grid, const Expr& e) {
    std::vector<double> vals(static_cast<size_t>(grid.node_count()));
    for (int i = 0; i < grid.node_count(); ++i) {
        vals[static_cast<size_t>(i)] = e.evaluate(point_for(grid, i));
    }
    return Field(grid, std::move(vals));
}

VectorField sample_vector(const Grid& grid, std::span<const Expr> components) {
    if (static_cast<int>(components.size()) != grid.axis_count()) {
        throw std::invalid_argument("component count does not match grid kind");
    }
    std::vector<std::vector<double>> comps(
        static_cast<size_t>(grid.axis_count()),
        std::vector<double>(static_cast<size_t>(grid.node_count())));
    for (int i = 0; i < grid.node_count(); ++i) {
        const EvalPoint p = point_for(grid, i);
        for (int a = 0; a < grid.axis_count(); ++a) {
            comps[static_cast<size_t>(a)][static_cast<size_t>(i)] =
                components[static_cast<size_t>(a)].evaluate(p);
        }
    }
    return VectorField(grid, std::move(comps));
}

}  // namespace pullin
