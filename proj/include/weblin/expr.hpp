#pragma once

// Hash-consed expression DAG.
//
// Every node lives in a process-wide pool and is never freed; structurally
// identical nodes are interned once, so handle equality is pointer equality.
// Two families of constructors exist:
//   - the free functions below (add, mul, pow, ...) canonicalize on the fly:
//     n-ary flattening, constant folding, like-term collection, merging of
//     powers with a common base. They never create `div` or `neg` nodes.
//   - raw:: constructors build exactly the requested node. The parser uses
//     them so that printing reproduces the user's structure.

#include "weblin/numeric.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace weblin {

enum class Kind : std::uint8_t {
    constant,
    variable,
    parameter,
    function, // abstract f(x, y) with a derivative multi-index; analysis only
    add,
    mul,
    div,
    neg,
    pow,
    exp,
    log,
};

enum class Var : std::uint8_t { x, y };

struct Node;

class Expr {
public:
    /// The constant 0.
    Expr();

    Kind kind() const;
    const Rational& value() const;
    const std::string& name() const;
    std::span<const Expr> children() const;
    /// Derivative orders (d/dx, d/dy) of a function node.
    std::array<int, 2> jet() const;

    std::uint64_t hash() const;
    std::uint32_t id() const;

    bool is_constant() const { return kind() == Kind::constant; }
    bool is_zero() const;
    bool is_one() const;
    bool is_constant(long v) const;

    bool depends_on(Var v) const;
    bool has_parameters() const;
    bool has_functions() const;
    /// exp/log present.
    bool has_transcendental() const;
    /// A power whose exponent is not a constant integer.
    bool has_fractional_power() const;
    /// Built only by canonicalizing constructors all the way down.
    bool is_canonical() const;
    /// This node (not necessarily its children) came from a canonicalizing
    /// constructor, so a mul keeps its rational coefficient first.
    bool is_canonical_node() const;

    const Node* node() const { return node_; }

    friend bool operator==(Expr a, Expr b) { return a.node_ == b.node_; }
    friend bool operator!=(Expr a, Expr b) { return a.node_ != b.node_; }

    explicit Expr(const Node* n) : node_(n) {}

private:
    const Node* node_;
};

struct ExprHash {
    std::size_t operator()(Expr e) const { return static_cast<std::size_t>(e.hash()); }
};

/// Deterministic total order independent of construction order.
bool structural_less(Expr a, Expr b);

Expr constant(const Rational& q);
Expr integer(long v);
Expr variable(Var v);
Expr var_x();
Expr var_y();
Expr parameter(std::string_view name);
Expr function(std::string_view name, int dx = 0, int dy = 0);

Expr add(std::span<const Expr> terms);
Expr add(Expr a, Expr b);
Expr mul(std::span<const Expr> factors);
Expr mul(Expr a, Expr b);
Expr mul(Expr a, Expr b, Expr c);
Expr sub(Expr a, Expr b);
Expr neg(Expr a);
Expr div(Expr a, Expr b);
Expr pow(Expr base, Expr exponent);
Expr pow(Expr base, const Rational& exponent);
Expr pow(Expr base, long exponent);
Expr sqrt(Expr a);
Expr exp(Expr a);
Expr log(Expr a);

inline Expr operator+(Expr a, Expr b) { return add(a, b); }
inline Expr operator-(Expr a, Expr b) { return sub(a, b); }
inline Expr operator*(Expr a, Expr b) { return mul(a, b); }
inline Expr operator/(Expr a, Expr b) { return div(a, b); }
inline Expr operator-(Expr a) { return neg(a); }
inline Expr operator*(long c, Expr a) { return mul(integer(c), a); }
inline Expr operator*(const Rational& c, Expr a) { return mul(constant(c), a); }

namespace raw {
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr div(Expr a, Expr b);
Expr neg(Expr a);
Expr pow(Expr base, Expr exponent);
Expr exp(Expr a);
Expr log(Expr a);
} // namespace raw

/// Canonical rebuild. Value-preserving where the input is defined; returns the
/// input unchanged unless the rebuilt DAG is strictly smaller.
Expr simplify(Expr e);

/// Unconditional canonical rebuild (may grow the DAG).
Expr canonicalize(Expr e);

/// True when a constant division by zero was folded into the DAG (it is kept
/// as the unevaluated node 0^-k and fails at evaluation).
bool has_constant_singularity(Expr e);

/// Number of distinct nodes reachable from e.
std::size_t dag_size(Expr e);

/// Symbolic partial derivative; parameters are constants. Memoized per (node, variable).
Expr partial(Expr e, Var v);

/// Replaces variables/parameters (keyed by the atom node) with expressions.
Expr substitute(Expr e, const std::map<std::string, Expr>& replacements);

/// Names of free parameters, sorted.
std::vector<std::string> parameters(Expr e);

/// Replaces every exp(u) node by a fresh parameter "exp#k" (names returned in
/// order). Nested exponentials vanish with their enclosing node.
Expr abstract_exponentials(Expr e, std::vector<std::string>& names);

/// Max derivative order reached by function nodes named `name` (-1 when absent).
int max_function_order(Expr e, std::string_view name);

/// Node count of the process-wide pool (diagnostics).
std::size_t pool_size();

} // namespace weblin
