#include "weblin/covariant.hpp"

#include <stdexcept>

namespace weblin {

WeightedScalar delta(const WeightedScalar& u, int i, const WebSpec& web)
{
    if (u.weight < 0) throw std::invalid_argument("negative weight");
    if (i != 1 && i != 2) throw std::invalid_argument("frame index must be 1 or 2");
    Expr d = i == 1 ? d1(u.expr, web) : d2(u.expr, web);
    if (u.weight != 0) d = d - u.weight * (web_H(web) * u.expr);
    return {d, u.weight + 1};
}

Expr commutator_residual(const WeightedScalar& u, const WebSpec& web)
{
    const WeightedScalar u21 = delta(delta(u, 1, web), 2, web);
    const WeightedScalar u12 = delta(delta(u, 2, web), 1, web);
    if (u21.weight != u.weight + 2 || u12.weight != u.weight + 2) throw std::logic_error("weight bookkeeping broken");
    return u21.expr - u12.expr - u.weight * (web_K(web) * u.expr);
}

Prolongation prolong_a(const WebSpec& web, int alpha)
{
    const WeightedScalar a{basic_invariant(web, alpha), 0};
    auto D = [&](const WeightedScalar& u, int i) { return delta(u, i, web); };
    const WeightedScalar a1 = D(a, 1), a2 = D(a, 2);
    const WeightedScalar a11 = D(a1, 1), a12 = D(a1, 2), a21 = D(a2, 1), a22 = D(a2, 2);
    auto third = [&](const WeightedScalar& second, int k) {
        const WeightedScalar t = D(second, k);
        if (t.weight != 3) throw std::logic_error("weight bookkeeping broken");
        return t.expr;
    };
    Prolongation p;
    p.a = a.expr;
    p.a1 = a1.expr;
    p.a2 = a2.expr;
    p.a11 = a11.expr;
    p.a12 = a12.expr;
    p.a21 = a21.expr;
    p.a22 = a22.expr;
    p.a111 = third(a11, 1);
    p.a222 = third(a22, 2);
    p.t112 = third(a11, 2);
    p.t121 = third(a12, 1);
    p.t211 = third(a21, 1);
    p.t122 = third(a12, 2);
    p.t212 = third(a21, 2);
    p.t221 = third(a22, 1);
    const Expr third_of = constant(Rational(1, 3));
    p.a112 = third_of * (p.t112 + p.t121 + p.t211);
    p.a122 = third_of * (p.t122 + p.t212 + p.t221);
    return p;
}

std::vector<Expr> symmetrization_residuals(const Prolongation& p, Expr K)
{
    const Expr k3 = constant(Rational(1, 3)) * K;
    return {
        p.t112 - p.a112 - 2 * (k3 * p.a1),
        p.t121 - p.a112 + k3 * p.a1,
        p.t221 - p.a122 + 2 * (k3 * p.a2),
        p.t122 - p.a122 - k3 * p.a2,
    };
}

namespace {

Expr c(long v) { return integer(v); }

} // namespace

Expr K1_closed_rhs(const Prolongation& p, Expr K)
{
    const Expr a = p.a, a1 = p.a1, a2 = p.a2;
    const Expr A = a - pow(a, 2L);
    const Expr a_2 = pow(a, 2L), a_3 = pow(a, 3L);
    const Expr first = constant(Rational(1, 3)) * (((c(1) - a) * a1 + a * a2) * K) - p.a111 + (c(2) + a) * p.a112 - 2 * (a * p.a122);
    const Expr second = ((c(4) - 6 * a) * a1 + (a_2 + 3 * a - c(2)) * a2) * p.a11 +
                        ((2 * a_2 + 7 * a - c(6)) * a1 + (2 * a - 3 * a_2) * a2) * p.a12 +
                        (2 * ((a - a_2) * a1) - 2 * (a_2 * a2)) * p.a22;
    const Expr third = (-6 * a_2 + 8 * a - c(3)) * pow(a1, 3L) - 2 * (a_3 * pow(a2, 3L)) +
                       (2 * a_3 + 9 * a_2 - 15 * a + c(6)) * pow(a1, 2L) * a2 + (-3 * a_3 + 6 * a_2 - 2 * a) * a1 * pow(a2, 2L);
    return first / A + second / pow(A, 2L) + third / pow(A, 3L);
}

Expr K2_closed_rhs(const Prolongation& p, Expr K)
{
    const Expr a = p.a, a1 = p.a1, a2 = p.a2;
    const Expr A = a - pow(a, 2L);
    const Expr a_2 = pow(a, 2L), a_3 = pow(a, 3L);
    const Expr first = constant(Rational(1, 3)) * ((a1 + (a - c(1)) * a2) * K) + 2 * p.a112 - (2 * a + c(1)) * p.a122 + a * p.a222;
    const Expr second = (2 * a1 + (2 * a - c(2)) * a2) * p.a11 + ((6 * a - c(5)) * a1 + (-2 * a_2 - 3 * a + c(2)) * a2) * p.a12 +
                        ((c(1) - a - 2 * a_2) * a1 + 2 * (a_2 * a2)) * p.a22;
    const Expr third = (4 * a - c(2)) * pow(a1, 3L) + a_3 * pow(a2, 3L) + (6 * a_2 - 12 * a + c(5)) * pow(a1, 2L) * a2 +
                       (-2 * a_3 - 3 * a_2 + 5 * a - c(2)) * a1 * pow(a2, 2L);
    return first / A + second / pow(A, 2L) + third / pow(A, 3L);
}

Expr K1_closed_residual(const WebSpec& web, int alpha)
{
    const Expr K = web_K(web);
    const Expr K1 = delta({K, 2}, 1, web).expr;
    return K1 - K1_closed_rhs(prolong_a(web, alpha), K);
}

Expr K2_closed_residual(const WebSpec& web, int alpha)
{
    const Expr K = web_K(web);
    const Expr K2 = delta({K, 2}, 2, web).expr;
    return K2 - K2_closed_rhs(prolong_a(web, alpha), K);
}

} // namespace weblin
