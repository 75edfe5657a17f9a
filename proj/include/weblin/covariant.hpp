#pragma once

// Weighted covariant derivatives with respect to the Chern connection of the
// 3-subweb (x, y, f), prolongations of the basic invariant and the closed
// forms of the linearizability conditions in terms of them.

#include "weblin/calculus.hpp"

namespace weblin {

struct WeightedScalar {
    Expr expr;
    int weight = 0;
};

/// δ_i^(k) u = ∂_i u - k H u; the result has weight k + 1.
WeightedScalar delta(const WeightedScalar& u, int i, const WebSpec& web);

/// δ_2^(s+1) δ_1^(s) u - δ_1^(s+1) δ_2^(s) u - s K u  with s = weight of u.
Expr commutator_residual(const WeightedScalar& u, const WebSpec& web);

struct Prolongation {
    Expr a, a1, a2;
    Expr a11, a12, a21, a22;
    Expr a111, a112, a122, a222;
    // unsymmetrized ã_ijk = δ_k δ_j δ_i a
    Expr t112, t121, t211, t122, t212, t221;
};

Prolongation prolong_a(const WebSpec& web, int alpha = 4);

/// ã112 - a112 - 2K a1/3, ã121 - a112 + K a1/3, ã221 - a122 + 2K a2/3,
/// ã122 - a122 - K a2/3.
std::vector<Expr> symmetrization_residuals(const Prolongation& p, Expr K);

/// Right-hand sides of K1 = ..., K2 = ... in powers of 1/(a - a^2).
Expr K1_closed_rhs(const Prolongation& p, Expr K);
Expr K2_closed_rhs(const Prolongation& p, Expr K);

/// K1 - RHS1 with K1 = δ_1^(2) K = ∂_1 K - 2HK.
Expr K1_closed_residual(const WebSpec& web, int alpha = 4);
/// K2 - RHS2 with K2 = δ_2^(2) K = ∂_2 K - 2HK.
Expr K2_closed_residual(const WebSpec& web, int alpha = 4);

} // namespace weblin
