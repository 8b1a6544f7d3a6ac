#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "acdiag/errors.hpp"

namespace acdiag::expr {

enum class NodeKind {
    Constant,  // nonnegative literal
    Pi,
    VarX,
    VarY,
    Neg,
    Sin,
    Cos,
    Abs,
    Sqrt,
    Exp,
    Log,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Ramp,  // ramp(a,b,x): 0 for x<=a, 1 for x>=b, linear between
};

struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;  // Constant only
    std::vector<std::unique_ptr<Node>> args;

    Node() = default;
    Node(NodeKind k, double v) : kind(k), value(v) {}
    explicit Node(NodeKind k) : kind(k) {}
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_constant(double v);
NodePtr make_node(NodeKind k, std::vector<NodePtr> args);
NodePtr clone(const Node& n);
bool identical(const Node& a, const Node& b);
int node_arity(NodeKind k);  // number of child expressions

/// Immutable expression in one variable (x) or two (x, y). Parsing fixes
/// the allowed arity; evaluation is pure and shareable across threads.
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, int arity);

    /// Grammar: + - over * / over unary minus over right-associative ^,
    /// atoms are literals, pi, x, y and the function calls
    /// sin cos abs sqrt exp log ramp. Throws ParseError with a byte offset.
    static Expression parse(std::string_view source, int arity);

    double operator()(double x) const;
    double operator()(double x, double y) const;

    /// Prints with minimal parentheses; the output parses back to an
    /// identical tree.
    std::string unparse() const;

    int arity() const { return arity_; }
    const Node& root() const;
    bool empty() const { return root_ == nullptr; }

private:
    std::shared_ptr<const Node> root_;
    int arity_ = 1;
};

/// Direct tree evaluation; y ignored for arity-1 trees.
double eval_node(const Node& n, double x, double y);

}  // namespace acdiag::expr
