#pragma once

// Seeded random expressions over x, y and the parameter n for property tests.

#include "weblin/expr.hpp"

#include <random>

namespace weblin::testing {

class RandomExpr {
public:
    explicit RandomExpr(std::uint64_t seed, bool transcendental = true) : rng_(seed), transcendental_(transcendental) {}

    Expr operator()(int depth)
    {
        if (depth == 0 || pick(4) == 0) return leaf();
        switch (pick(transcendental_ ? 9 : 6)) {
        case 0: return (*this)(depth - 1) + (*this)(depth - 1);
        case 1: return (*this)(depth - 1) - (*this)(depth - 1);
        case 2: return (*this)(depth - 1) * (*this)(depth - 1);
        case 3: return (*this)(depth - 1) / (integer(2) + pow((*this)(depth - 1), 2L));
        case 4: return pow((*this)(depth - 1), static_cast<long>(pick(5)) - 2);
        case 5: return -(*this)(depth - 1);
        case 6: return sqrt(integer(1) + pow((*this)(depth - 1), 2L));
        case 7: return exp(constant(Rational(1, 3)) * (*this)(depth - 1));
        default: return log(integer(3) + pow((*this)(depth - 1), 2L));
        }
    }

    /// Same structure through raw constructors, as the parser would build it.
    Expr raw_tree(int depth)
    {
        if (depth == 0 || pick(4) == 0) return leaf();
        switch (pick(5)) {
        case 0: return raw::add({raw_tree(depth - 1), raw_tree(depth - 1)});
        case 1: return raw::mul({raw_tree(depth - 1), raw_tree(depth - 1), leaf()});
        case 2: return raw::div(raw_tree(depth - 1), raw::add({integer(2), raw::mul({raw_tree(depth - 1), raw_tree(depth - 1)})}));
        case 3: return raw::neg(raw_tree(depth - 1));
        default: return raw::pow(raw_tree(depth - 1), integer(static_cast<long>(pick(4))));
        }
    }

    Rational coordinate()
    {
        Rational c(static_cast<long>(1 + pick(9999)), 20000);
        c.canonicalize();
        return c + Rational(1, 4);
    }

private:
    std::mt19937_64 rng_;
    bool transcendental_;

    unsigned pick(unsigned n) { return static_cast<unsigned>(rng_() % n); }

    Expr leaf()
    {
        switch (pick(6)) {
        case 0: return var_x();
        case 1: return var_y();
        case 2: return parameter("n");
        case 3: return constant(Rational(static_cast<long>(pick(7)) - 3, static_cast<long>(1 + pick(3))));
        case 4: return var_x() * var_y();
        default: return var_x() + constant(Rational(static_cast<long>(pick(5)), 2));
        }
    }
};

} // namespace weblin::testing
