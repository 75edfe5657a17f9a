#pragma once

// Web frame operators and the scalars H, K, a, mu of a planar d-web given by
// the web functions f, g_4, ..., g_d (foliations 1 and 2 are x = const and
// y = const).

#include "weblin/eval.hpp"
#include "weblin/expr.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace weblin {

struct Domain {
    Rational x_lo{1, 4}, x_hi{3, 4}, y_lo{1, 4}, y_hi{3, 4};

    bool contains(const Rational& x, const Rational& y) const { return x_lo <= x && x <= x_hi && y_lo <= y && y <= y_hi; }
};

struct ParameterRange {
    Rational lo{2}, hi{7};
};

struct WebSpec {
    WebSpec(Expr f, std::vector<Expr> gs, Domain domain = {}, std::uint64_t seed = 1);

    Expr f;
    std::vector<Expr> gs; // g_4, ..., g_d
    Domain domain;
    std::uint64_t seed;
    std::map<std::string, ParameterRange> parameter_ranges; // defaults to [2, 7]

    int d() const { return 3 + static_cast<int>(gs.size()); }
    /// g_alpha for 4 <= alpha <= d.
    Expr g(int alpha) const;
    /// Free parameters of f and all g, sorted.
    std::vector<std::string> parameters() const;
    ParameterRange range_of(const std::string& name) const;
};

/// ∂_1 e = -e_x / f_x.
Expr d1(Expr e, const WebSpec& web);
/// ∂_2 e = -e_y / f_y.
Expr d2(Expr e, const WebSpec& web);
Expr d1(Expr e, Expr f);
Expr d2(Expr e, Expr f);

Expr web_H(const WebSpec& web);

enum class KFormula { structure, log };
Expr web_K(const WebSpec& web, KFormula formula = KFormula::structure);

enum class AFormula { quotient, frame };
/// a_alpha = f_y g_x / (f_x g_y)  (quotient)  or  ∂_1 g / ∂_2 g  (frame).
Expr basic_invariant(const WebSpec& web, int alpha, AFormula formula = AFormula::quotient);

/// mu_alpha = (∂_1 a - a ∂_2 a) / (a - a^2).
Expr mu(const WebSpec& web, int alpha);

/// f(x, y) -> f(p(x), q(y)) applied to every web function; domain mapped by
/// the caller.
WebSpec reparameterize(const WebSpec& web, Expr p_of_x, Expr q_of_y, Domain domain);

// ---------------------------------------------------------------------------
// Sampling

struct SamplePoint {
    Rational x, y;
    std::map<std::string, Rational> params;

    Bindings bindings() const;
};

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Draws grid rationals lo + (hi - lo) k / 10^4 and rejects points where a
/// web form degenerates: f_x, f_y, (g_a)_x, (g_a)_y nonzero, a_alpha not in
/// {0, 1}, all a_alpha pairwise distinct.
class Sampler {
public:
    static constexpr int denominator = 10000;

    Sampler(const WebSpec& web, std::uint64_t stream, int max_rejections = 100);

    std::map<std::string, Rational> draw_parameters();
    /// Throws SamplingError once the rejection cap is exhausted.
    SamplePoint next_point(const std::map<std::string, Rational>& params);
    /// Counts one more rejection for a point that failed downstream.
    void reject(const std::string& why = {});
    int rejections() const { return rejections_; }

private:
    const WebSpec& web_;
    std::mt19937_64 rng_;
    int max_rejections_;
    int rejections_ = 0;
    Program checks_;
    std::string last_violation_;

    Rational draw(const Rational& lo, const Rational& hi);
    /// Empty when p is admissible, else the violated constraint.
    std::string violation(const SamplePoint& p) const;
};

} // namespace weblin
