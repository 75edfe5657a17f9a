#include "weblin/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

namespace weblin {

WebSpec::WebSpec(Expr f_, std::vector<Expr> gs_, Domain domain_, std::uint64_t seed_)
    : f(canonicalize(f_)), domain(domain_), seed(seed_)
{
    if (gs_.empty()) throw std::invalid_argument("a d-web needs d >= 4: give f and at least one g");
    for (Expr g : gs_) gs.push_back(canonicalize(g));
    if (!(domain.x_lo < domain.x_hi) || !(domain.y_lo < domain.y_hi)) throw std::invalid_argument("empty domain rectangle");
}

Expr WebSpec::g(int alpha) const
{
    if (alpha < 4 || alpha > d()) throw std::out_of_range("web index out of range: " + std::to_string(alpha));
    return gs[static_cast<std::size_t>(alpha - 4)];
}

std::vector<std::string> WebSpec::parameters() const
{
    std::vector<std::string> names = weblin::parameters(f);
    for (Expr g : gs)
        for (auto& n : weblin::parameters(g)) names.push_back(n);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

ParameterRange WebSpec::range_of(const std::string& name) const
{
    auto it = parameter_ranges.find(name);
    return it == parameter_ranges.end() ? ParameterRange{} : it->second;
}

namespace {

struct FrameKey {
    std::uint32_t e, f;
    int op;
    bool operator==(const FrameKey&) const = default;
};

struct FrameKeyHash {
    std::size_t operator()(const FrameKey& k) const
    {
        return (static_cast<std::size_t>(k.e) * 0x9e3779b97f4a7c15ULL) ^ (static_cast<std::size_t>(k.f) << 1) ^ static_cast<std::size_t>(k.op);
    }
};

std::mutex frame_mutex;
std::unordered_map<FrameKey, Expr, FrameKeyHash> frame_memo;

Expr frame_derivative(Expr e, Expr f, Var v)
{
    if (!e.depends_on(v)) return integer(0);
    const FrameKey key{e.id(), f.id(), v == Var::x ? 1 : 2};
    {
        std::lock_guard lock(frame_mutex);
        if (auto it = frame_memo.find(key); it != frame_memo.end()) return it->second;
    }
    Expr out = neg(div(partial(e, v), partial(f, v)));
    std::lock_guard lock(frame_mutex);
    frame_memo.emplace(key, out);
    return out;
}

} // namespace

Expr d1(Expr e, Expr f) { return frame_derivative(e, f, Var::x); }
Expr d2(Expr e, Expr f) { return frame_derivative(e, f, Var::y); }
Expr d1(Expr e, const WebSpec& web) { return d1(e, web.f); }
Expr d2(Expr e, const WebSpec& web) { return d2(e, web.f); }

Expr web_H(const WebSpec& web)
{
    Expr fx = partial(web.f, Var::x);
    Expr fy = partial(web.f, Var::y);
    return div(partial(fx, Var::y), mul(fx, fy));
}

Expr web_K(const WebSpec& web, KFormula formula)
{
    if (formula == KFormula::structure) {
        Expr H = web_H(web);
        return sub(d1(H, web), d2(H, web));
    }
    Expr fx = partial(web.f, Var::x);
    Expr fy = partial(web.f, Var::y);
    Expr l = log(div(fx, fy));
    return neg(div(partial(partial(l, Var::x), Var::y), mul(fx, fy)));
}

Expr basic_invariant(const WebSpec& web, int alpha, AFormula formula)
{
    Expr g = web.g(alpha);
    if (formula == AFormula::frame) return div(d1(g, web), d2(g, web));
    Expr fx = partial(web.f, Var::x), fy = partial(web.f, Var::y);
    Expr gx = partial(g, Var::x), gy = partial(g, Var::y);
    return div(mul(fy, gx), mul(fx, gy));
}

Expr mu(const WebSpec& web, int alpha)
{
    Expr a = basic_invariant(web, alpha);
    return div(sub(d1(a, web), mul(a, d2(a, web))), sub(a, pow(a, 2L)));
}

WebSpec reparameterize(const WebSpec& web, Expr p_of_x, Expr q_of_y, Domain domain)
{
    const std::map<std::string, Expr> sub_map{{"x", p_of_x}, {"y", q_of_y}};
    std::vector<Expr> gs;
    for (Expr g : web.gs) gs.push_back(substitute(g, sub_map));
    WebSpec out(substitute(web.f, sub_map), gs, domain, web.seed);
    out.parameter_ranges = web.parameter_ranges;
    return out;
}

// ---------------------------------------------------------------------------

Bindings SamplePoint::bindings() const
{
    Bindings b(params.begin(), params.end());
    b["x"] = x;
    b["y"] = y;
    return b;
}

namespace {

Program admissibility_program(const WebSpec& web)
{
    std::vector<Expr> roots{partial(web.f, Var::x), partial(web.f, Var::y)};
    for (int alpha = 4; alpha <= web.d(); ++alpha) {
        Expr g = web.g(alpha);
        roots.push_back(partial(g, Var::x));
        roots.push_back(partial(g, Var::y));
        roots.push_back(basic_invariant(web, alpha));
    }
    return Program(roots);
}

} // namespace

Sampler::Sampler(const WebSpec& web, std::uint64_t stream, int max_rejections)
    : web_(web), rng_(web.seed * 0x9e3779b97f4a7c15ULL + stream), max_rejections_(max_rejections), checks_(admissibility_program(web))
{
}

Rational Sampler::draw(const Rational& lo, const Rational& hi)
{
    const long k = 1 + static_cast<long>(rng_() % static_cast<std::uint64_t>(denominator - 1));
    Rational t(k, denominator);
    t.canonicalize();
    Rational v = lo + (hi - lo) * t;
    v.canonicalize();
    return v;
}

std::map<std::string, Rational> Sampler::draw_parameters()
{
    std::map<std::string, Rational> params;
    for (auto& name : web_.parameters()) {
        const ParameterRange r = web_.range_of(name);
        params[name] = draw(r.lo, r.hi);
    }
    return params;
}

std::string Sampler::violation(const SamplePoint& p) const
{
    std::vector<BigFloat> v;
    try {
        v = checks_.run_float(p.bindings(), 128);
    } catch (const EvalError& err) {
        return std::string("web functions undefined (") + err.what() + ")";
    }
    auto tiny = [](const BigFloat& z) { return std::fabs(z.to_double()) < 1e-30; };
    if (tiny(v[0])) return "f_x = 0";
    if (tiny(v[1])) return "f_y = 0";
    std::vector<double> as;
    int alpha = 4;
    for (std::size_t i = 2; i + 2 < v.size(); i += 3, ++alpha) {
        const std::string g = "g" + std::to_string(alpha);
        if (tiny(v[i])) return g + "_x = 0";
        if (tiny(v[i + 1])) return g + "_y = 0";
        const double a = v[i + 2].to_double();
        if (std::fabs(a) < 1e-12) return "a" + std::to_string(alpha) + " = 0";
        if (std::fabs(a - 1) < 1e-12) return "a" + std::to_string(alpha) + " = 1";
        for (std::size_t k = 0; k < as.size(); ++k)
            if (std::fabs(a - as[k]) < 1e-12 * (1 + std::fabs(a))) return "a" + std::to_string(k + 4) + " = a" + std::to_string(alpha);
        as.push_back(a);
    }
    return {};
}

SamplePoint Sampler::next_point(const std::map<std::string, Rational>& params)
{
    for (;;) {
        SamplePoint p{draw(web_.domain.x_lo, web_.domain.x_hi), draw(web_.domain.y_lo, web_.domain.y_hi), params};
        const std::string why = violation(p);
        if (why.empty()) return p;
        last_violation_ = why + " at (" + to_string(p.x) + ", " + to_string(p.y) + ")";
        reject();
    }
}

void Sampler::reject(const std::string& why)
{
    if (!why.empty()) last_violation_ = why;
    if (++rejections_ > max_rejections_) {
        std::string msg = "domain too singular: more than " + std::to_string(max_rejections_) + " rejected samples";
        if (!last_violation_.empty()) msg += "; last violation " + last_violation_;
        throw SamplingError(msg);
    }
}

} // namespace weblin
