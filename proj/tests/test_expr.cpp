#include "random_expr.hpp"

#include "weblin/eval.hpp"
#include "weblin/syntax.hpp"

#include <doctest.h>

#include <thread>

using namespace weblin;

namespace {

Bindings at(const Rational& x, const Rational& y, const Rational& n = Rational(5, 2))
{
    return {{"x", x}, {"y", y}, {"n", n}};
}

// Values agree exactly, or to 2^-128 relative at 256 bits.
bool same_value(Expr a, Expr b, const Bindings& point, bool& evaluated)
{
    evaluated = false;
    try {
        if (exact_eligible(a) && exact_eligible(b)) {
            const Rational va = evaluate_exact(a, point), vb = evaluate_exact(b, point);
            evaluated = true;
            return va == vb;
        }
        const BigFloat va = evaluate_float(a, point, 256), vb = evaluate_float(b, point, 256);
        evaluated = true;
        const BigFloat diff = (va - vb).abs();
        BigFloat tol = power_of_two(-128, 256);
        if (va.abs() > BigFloat(1.0, 256)) tol = tol * va.abs();
        return diff < tol;
    } catch (const EvalError&) {
        return true;
    }
}

} // namespace

TEST_CASE("parse builds the input structure")
{
    const Expr e = parse("x/y");
    CHECK(e.kind() == Kind::div);
    CHECK(e.children()[0] == var_x());
    CHECK(e.children()[1] == var_y());

    const Expr s = parse("x + sqrt(x^2 - y)");
    REQUIRE(s.kind() == Kind::add);
    const Expr root = s.children()[1];
    REQUIRE(root.kind() == Kind::pow);
    CHECK(root.children()[1] == constant(Rational(1, 2)));
    CHECK(root.children()[0].kind() == Kind::add);
    CHECK(format(s) == "x + sqrt(x^2 - y)");
}

TEST_CASE("parse errors carry the offset")
{
    try {
        parse("x + + y");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("   "), ParseError);
    CHECK_THROWS_AS(parse("sin(x)"), ParseError);
    CHECK_THROWS_AS(parse("(x + y"), ParseError);
    CHECK_THROWS_AS(parse("x y"), ParseError);
    CHECK_THROWS_AS(parse("x $ y"), ParseError);
}

TEST_CASE("lexical details")
{
    CHECK(parse("xy").kind() == Kind::parameter);
    CHECK(parse("0.125") == constant(Rational(1, 8)));
    CHECK(parse("3/4") == raw::div(integer(3), integer(4)));
    CHECK(simplify(parse("3/4")) == constant(Rational(3, 4)));
    CHECK(parse("2^3^2").kind() == Kind::pow);
    CHECK(evaluate_exact(parse("2^3^2"), {}) == 512);
    CHECK(evaluate_exact(parse("-2^2"), {}) == -4);
    CHECK(evaluate_exact(parse("2^-1"), {}) == Rational(1, 2));
}

TEST_CASE("hash consing")
{
    CHECK(parse("x*(y+1)/x") == parse("x*(y+1)/x"));
    CHECK(simplify(parse("x + y")) == simplify(parse("y + x")));
    CHECK(sqrt(var_x()) == pow(var_x(), Rational(1, 2)));
    CHECK(integer(3) == constant(Rational(6, 2)));
}

TEST_CASE("construction is thread safe and interned once")
{
    std::vector<Expr> built(4);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < built.size(); ++t) {
        pool.emplace_back([&built, t] {
            testing::RandomExpr gen(99);
            Expr acc;
            for (int k = 0; k < 50; ++k) acc = acc + gen(4);
            built[t] = partial(acc, Var::x);
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : built) CHECK(e == built[0]);
}

TEST_CASE("simplify examples")
{
    const Expr e = parse("x^2*y + exp(x)");
    CHECK(simplify(raw::add({e, raw::neg(e)})).is_zero());
    CHECK(simplify(raw::mul({integer(1), e})) == simplify(e));
    CHECK(format(simplify(parse("x^2/x"))) == "x");
    CHECK(simplify(parse("x - x")).is_zero());
    CHECK(simplify(parse("2*x*3")) == simplify(parse("6*x")));
    CHECK(simplify(parse("(x+y)+(x+y)-2*(x+y)")).is_zero());
    CHECK(simplify(parse("0*exp(x)")).is_zero());
}

TEST_CASE("constant division by zero is kept and reported")
{
    const Expr e = simplify(parse("x/(1-1)"));
    CHECK(has_constant_singularity(e));
    CHECK_THROWS_AS(evaluate_exact(e, at(1, 1)), EvalError);
}

TEST_CASE("evaluate examples")
{
    CHECK(evaluate_exact(parse("x/y"), at(1, 2)) == Rational(1, 2));
    CHECK(evaluate_exact(parse("x-x"), at(Rational(7, 3), 2)) == 0);
    try {
        evaluate_exact(parse("x/y"), at(1, 0));
        FAIL("no error");
    } catch (const EvalError& e) {
        CHECK(e.reason() == EvalFailure::singular);
    }
    try {
        evaluate_exact(parse("x/y"), {{"x", Rational(1)}});
        FAIL("no error");
    } catch (const EvalError& e) {
        CHECK(e.reason() == EvalFailure::unbound);
    }
    try {
        evaluate_float(parse("sqrt(x - 2)"), at(1, 1), 128);
        FAIL("no error");
    } catch (const EvalError& e) {
        CHECK(e.reason() == EvalFailure::domain);
    }
    try {
        evaluate_float(parse("log(x - 1)"), at(1, 1), 128);
        FAIL("no error");
    } catch (const EvalError& e) {
        CHECK(e.reason() == EvalFailure::domain);
    }
    CHECK_THROWS_AS(evaluate_exact(parse("exp(x)"), at(1, 1)), EvalError);
    CHECK_THROWS_AS(evaluate_exact(parse("sqrt(x)"), at(2, 1)), EvalError);
    CHECK(evaluate_exact(parse("sqrt(x)"), at(Rational(9, 4), 1)) == Rational(3, 2));
    CHECK(!exact_eligible(parse("exp(x)")));
    CHECK(exact_eligible(parse("x^2/y")));

    EvalContext ctx;
    ctx.bindings = at(1, 1);
    ctx.mode = Mode::floating;
    ctx.precision = 256;
    const Value v = evaluate(parse("exp(x)"), ctx);
    CHECK(v.approx.to_string(20) == "2.7182818284590452354e0");
}

TEST_CASE("float evaluation is correctly rounded at the requested precision")
{
    const BigFloat a = evaluate_float(parse("sqrt(2)"), {}, 512);
    const BigFloat b = evaluate_float(parse("sqrt(2)"), {}, 256);
    const BigFloat diff = (BigFloat(a.to_double(), 256) - b).abs();
    CHECK(diff < power_of_two(-50, 256));
    CHECK(b.to_string(30) == "1.41421356237309504880168872421e0");
}

TEST_CASE("format examples")
{
    CHECK(format(raw::div(var_x(), var_y())) == "x/y");
    CHECK(format(Expr()) == "0");
    CHECK(format(partial(parse("x/y"), Var::x)) == "1/y");
    CHECK(format(partial(parse("x/y"), Var::y)) == "-x/y^2");
    CHECK(format(partial(parse("x^n"), Var::x)) == "n*x^(-1 + n)");
}

TEST_CASE("partial derivative rules")
{
    CHECK(partial(integer(7), Var::x).is_zero());
    CHECK(partial(parameter("n"), Var::y).is_zero());
    CHECK(partial(var_x(), Var::x).is_one());
    CHECK(simplify(partial(parse("exp(x*y)"), Var::y)) == simplify(parse("x*exp(x*y)")));
    CHECK(simplify(partial(parse("log(x)"), Var::x)) == simplify(parse("1/x")));
    const Expr f = function("f");
    CHECK(max_function_order(partial(partial(f, Var::x), Var::y), "f") == 2);
    CHECK(max_function_order(var_x(), "f") == -1);
}

TEST_CASE("property: simplify preserves value and never grows the DAG")
{
    testing::RandomExpr gen(20240611);
    int evaluated = 0;
    for (int k = 0; k < 300; ++k) {
        const Expr e = gen.raw_tree(4);
        const Expr s = simplify(e);
        CHECK(dag_size(s) <= dag_size(e));
        for (int p = 0; p < 8; ++p) {
            bool ok = false;
            const auto point = at(gen.coordinate(), gen.coordinate(), gen.coordinate() * 4);
            CHECK_MESSAGE(same_value(e, s, point, ok), format(e));
            evaluated += ok;
        }
    }
    CHECK(evaluated > 1000);
}

TEST_CASE("property: canonical constructors preserve value")
{
    testing::RandomExpr gen(7);
    for (int k = 0; k < 200; ++k) {
        const Expr e = gen(4);
        const Expr raw_copy = parse(format(e));
        for (int p = 0; p < 8; ++p) {
            bool ok = false;
            CHECK_MESSAGE(same_value(e, raw_copy, at(gen.coordinate(), gen.coordinate()), ok), format(e));
        }
    }
}

TEST_CASE("property: format and parse round trip")
{
    testing::RandomExpr gen(11);
    for (int k = 0; k < 300; ++k) {
        const Expr e = k % 2 ? gen(4) : gen.raw_tree(4);
        const std::string text = format(e);
        const Expr back = parse(text);
        CHECK_MESSAGE(format(back) == text, text);
        CHECK(parse(text) == back);
        for (int p = 0; p < 5; ++p) {
            bool ok = false;
            CHECK_MESSAGE(same_value(e, back, at(gen.coordinate(), gen.coordinate()), ok), text);
        }
    }
}

TEST_CASE("property: partial derivatives match a finite-difference oracle")
{
    // five-point stencil with an exact rational step at 256 bits: truncation ~h^4
    testing::RandomExpr gen(3);
    const Rational h(1, 1L << 40);
    int checked = 0;
    for (int k = 0; k < 150; ++k) {
        const Expr e = gen(3);
        for (Var v : {Var::x, Var::y}) {
            const Expr d = partial(e, v);
            const Rational x = gen.coordinate(), y = gen.coordinate();
            auto shifted = [&](long m) {
                const Rational dx = v == Var::x ? h * m : Rational(0), dy = v == Var::y ? h * m : Rational(0);
                return evaluate_float(e, at(x + dx, y + dy), 256);
            };
            try {
                const BigFloat exact = evaluate_float(d, at(x, y), 256);
                const BigFloat num = shifted(-2) - shifted(-1) * BigFloat(8.0, 256) + shifted(1) * BigFloat(8.0, 256) - shifted(2);
                const BigFloat fd = num / (BigFloat(h, 256) * BigFloat(12.0, 256));
                BigFloat tol = power_of_two(-100, 256);
                if (exact.abs() > BigFloat(1.0, 256)) tol = tol * exact.abs();
                CHECK_MESSAGE((fd - exact).abs() < tol, format(e));
                ++checked;
            } catch (const EvalError&) {
            }
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("substitute and parameters")
{
    const Expr e = parse("x^n + y^n");
    CHECK(parameters(e) == std::vector<std::string>{"n"});
    const Expr s = substitute(e, {{"n", integer(2)}, {"x", parse("x+1")}});
    CHECK(evaluate_exact(s, at(1, 3)) == 13);
}
