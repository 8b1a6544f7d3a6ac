#include "acdiag/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace acdiag::expr {

namespace {

struct FnSpec {
    const char* name;
    NodeKind kind;
    int args;
};

constexpr FnSpec kFunctions[] = {
    {"sin", NodeKind::Sin, 1},   {"cos", NodeKind::Cos, 1},
    {"abs", NodeKind::Abs, 1},   {"sqrt", NodeKind::Sqrt, 1},
    {"exp", NodeKind::Exp, 1},   {"log", NodeKind::Log, 1},
    {"ramp", NodeKind::Ramp, 3},
};

class Parser {
public:
    Parser(std::string_view src, int arity) : src_(src), arity_(arity) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = parse_sum();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    int arity_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (eat('+')) {
                NodePtr rhs = parse_term();
                lhs = binary(NodeKind::Add, std::move(lhs), std::move(rhs));
            } else if (eat('-')) {
                NodePtr rhs = parse_term();
                lhs = binary(NodeKind::Sub, std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (eat('*')) {
                NodePtr rhs = parse_unary();
                lhs = binary(NodeKind::Mul, std::move(lhs), std::move(rhs));
            } else if (eat('/')) {
                NodePtr rhs = parse_unary();
                lhs = binary(NodeKind::Div, std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) {
            NodePtr inner = parse_unary();
            auto n = std::make_unique<Node>(NodeKind::Neg);
            n->args.push_back(std::move(inner));
            return n;
        }
        return parse_power();
    }

    // '^' binds tighter than unary minus on the left and associates right;
    // its exponent admits a leading unary minus (x^-2).
    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) {
            NodePtr exponent = parse_unary();
            return binary(NodeKind::Pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("expected expression", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_sum();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        throw ParseError(std::string("expected expression, found '") + c + "'",
                         pos_);
    }

    NodePtr parse_number() {
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", pos_);
        if (!std::isfinite(v)) throw ParseError("number out of range", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return make_constant(v);
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_'))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);

        if (name == "x") return std::make_unique<Node>(NodeKind::VarX);
        if (name == "y") {
            if (arity_ < 2)
                throw ParseError("variable 'y' not allowed in a one-variable "
                                 "expression",
                                 start);
            return std::make_unique<Node>(NodeKind::VarY);
        }
        if (name == "pi") return std::make_unique<Node>(NodeKind::Pi);

        for (const FnSpec& fn : kFunctions) {
            if (name != fn.name) continue;
            if (!eat('('))
                throw ParseError(std::string(name) + " requires arguments",
                                 pos_);
            auto n = std::make_unique<Node>(fn.kind);
            for (int i = 0; i < fn.args; ++i) {
                if (i > 0 && !eat(','))
                    throw ParseError("expected ','", pos_);
                n->args.push_back(parse_sum());
            }
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return n;
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'",
                         start);
    }

    static NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
        auto n = std::make_unique<Node>(k);
        n->args.push_back(std::move(a));
        n->args.push_back(std::move(b));
        return n;
    }
};

double finite_or_throw(double v, const char* op) {
    if (!std::isfinite(v))
        throw EvalError(std::string("non-finite result of ") + op);
    return v;
}

// Precedence levels used both by the parser shape and by unparse.
int prec(NodeKind k) {
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

void unparse_node(const Node& n, std::string& out);

void unparse_child(const Node& child, int min_prec, std::string& out) {
    if (prec(child.kind) < min_prec) {
        out += '(';
        unparse_node(child, out);
        out += ')';
    } else {
        unparse_node(child, out);
    }
}

const char* fn_name(NodeKind k) {
    for (const FnSpec& fn : kFunctions)
        if (fn.kind == k) return fn.name;
    return nullptr;
}

void unparse_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Constant: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", n.value);
            out += buf;
            return;
        }
        case NodeKind::Pi: out += "pi"; return;
        case NodeKind::VarX: out += "x"; return;
        case NodeKind::VarY: out += "y"; return;
        case NodeKind::Neg:
            out += '-';
            unparse_child(*n.args[0], 3, out);
            return;
        case NodeKind::Add:
        case NodeKind::Sub:
            unparse_child(*n.args[0], 1, out);
            out += n.kind == NodeKind::Add ? '+' : '-';
            // left-associative: an equal-precedence right child needs parens
            unparse_child(*n.args[1], 2, out);
            return;
        case NodeKind::Mul:
        case NodeKind::Div:
            unparse_child(*n.args[0], 2, out);
            out += n.kind == NodeKind::Mul ? '*' : '/';
            unparse_child(*n.args[1], 3, out);
            return;
        case NodeKind::Pow:
            unparse_child(*n.args[0], 5, out);  // base must be an atom
            out += '^';
            unparse_child(*n.args[1], 3, out);  // exponent admits unary minus
            return;
        default: {
            const char* name = fn_name(n.kind);
            if (!name) throw Error("unparse: unknown node kind");
            out += name;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                unparse_node(*n.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace

NodePtr make_constant(double v) {
    if (v < 0.0)
        throw Error("literal constants are nonnegative; wrap in a negation");
    return std::make_unique<Node>(NodeKind::Constant, v);
}

NodePtr make_node(NodeKind k, std::vector<NodePtr> args) {
    if (static_cast<int>(args.size()) != node_arity(k))
        throw Error("make_node: wrong argument count");
    auto n = std::make_unique<Node>(k);
    n->args = std::move(args);
    return n;
}

NodePtr clone(const Node& n) {
    auto c = std::make_unique<Node>(n.kind, n.value);
    for (const auto& a : n.args) c->args.push_back(clone(*a));
    return c;
}

bool identical(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == NodeKind::Constant && a.value != b.value) return false;
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!identical(*a.args[i], *b.args[i])) return false;
    return true;
}

int node_arity(NodeKind k) {
    switch (k) {
        case NodeKind::Constant:
        case NodeKind::Pi:
        case NodeKind::VarX:
        case NodeKind::VarY: return 0;
        case NodeKind::Neg:
        case NodeKind::Sin:
        case NodeKind::Cos:
        case NodeKind::Abs:
        case NodeKind::Sqrt:
        case NodeKind::Exp:
        case NodeKind::Log: return 1;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow: return 2;
        case NodeKind::Ramp: return 3;
    }
    return 0;
}

double eval_node(const Node& n, double x, double y) {
    switch (n.kind) {
        case NodeKind::Constant: return n.value;
        case NodeKind::Pi: return std::numbers::pi;
        case NodeKind::VarX: return x;
        case NodeKind::VarY: return y;
        case NodeKind::Neg: return -eval_node(*n.args[0], x, y);
        case NodeKind::Sin: return std::sin(eval_node(*n.args[0], x, y));
        case NodeKind::Cos: return std::cos(eval_node(*n.args[0], x, y));
        case NodeKind::Abs: return std::abs(eval_node(*n.args[0], x, y));
        case NodeKind::Sqrt: {
            double a = eval_node(*n.args[0], x, y);
            if (a < 0.0) throw EvalError("sqrt of a negative number");
            return std::sqrt(a);
        }
        case NodeKind::Exp:
            return finite_or_throw(std::exp(eval_node(*n.args[0], x, y)),
                                   "exp");
        case NodeKind::Log: {
            double a = eval_node(*n.args[0], x, y);
            if (!(a > 0.0)) throw EvalError("log of a non-positive number");
            return std::log(a);
        }
        case NodeKind::Add:
            return finite_or_throw(
                eval_node(*n.args[0], x, y) + eval_node(*n.args[1], x, y),
                "addition");
        case NodeKind::Sub:
            return finite_or_throw(
                eval_node(*n.args[0], x, y) - eval_node(*n.args[1], x, y),
                "subtraction");
        case NodeKind::Mul: {
            // An exact-zero factor absorbs the product even when the other
            // factor is undefined; this adopts continuous extensions such
            // as x*sin(1/x) at x = 0.
            double a;
            bool a_failed = false;
            EvalError deferred("");
            try {
                a = eval_node(*n.args[0], x, y);
            } catch (const EvalError& e) {
                a_failed = true;
                deferred = e;
            }
            if (!a_failed && a == 0.0) return 0.0;
            double b = eval_node(*n.args[1], x, y);
            if (b == 0.0) return 0.0;
            if (a_failed) throw deferred;
            return finite_or_throw(a * b, "multiplication");
        }
        case NodeKind::Div: {
            double b = eval_node(*n.args[1], x, y);
            if (b == 0.0) throw EvalError("division by zero");
            return finite_or_throw(eval_node(*n.args[0], x, y) / b,
                                   "division");
        }
        case NodeKind::Pow: {
            double a = eval_node(*n.args[0], x, y);
            double b = eval_node(*n.args[1], x, y);
            double r = std::pow(a, b);
            if (std::isnan(r))
                throw EvalError("power with a negative base and non-integer "
                                "exponent");
            return finite_or_throw(r, "power");
        }
        case NodeKind::Ramp: {
            double a = eval_node(*n.args[0], x, y);
            double b = eval_node(*n.args[1], x, y);
            double t = eval_node(*n.args[2], x, y);
            if (!(a < b)) throw EvalError("ramp requires a < b");
            if (t <= a) return 0.0;
            if (t >= b) return 1.0;
            return (t - a) / (b - a);
        }
    }
    throw Error("unreachable node kind");
}

Expression::Expression(NodePtr root, int arity)
    : root_(std::shared_ptr<const Node>(std::move(root))), arity_(arity) {
    if (arity_ != 1 && arity_ != 2) throw Error("expression arity must be 1 or 2");
}

Expression Expression::parse(std::string_view source, int arity) {
    if (arity != 1 && arity != 2) throw Error("expression arity must be 1 or 2");
    if (source.empty()) throw ParseError("empty expression", 0);
    Parser p(source, arity);
    return Expression(p.run(), arity);
}

double Expression::operator()(double x) const {
    if (arity_ != 1) throw Error("expected a two-variable point");
    return eval_node(root(), x, 0.0);
}

double Expression::operator()(double x, double y) const {
    if (arity_ != 2) throw Error("expected a one-variable point");
    return eval_node(root(), x, y);
}

std::string Expression::unparse() const {
    std::string out;
    unparse_node(root(), out);
    return out;
}

const Node& Expression::root() const {
    if (!root_) throw Error("empty expression");
    return *root_;
}

}  // namespace acdiag::expr
