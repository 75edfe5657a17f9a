#include "weblin/invariants.hpp"

#include "weblin/parallel.hpp"

#include <chrono>
#include <optional>
#include <random>

namespace weblin {

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::zero: return "ZERO";
    case Verdict::nonzero: return "NONZERO";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::yes: return "YES";
    case Outcome::no: return "NO";
    case Outcome::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Zero test

namespace {

std::string decimal(const Rational& q)
{
    if (sgn(q) == 0) return "0";
    return BigFloat(q, 256).to_string(20);
}

struct PointOutcome {
    bool evaluated = false;
    bool passed = false;
    std::string residual;
};

// Exact values of e at `points` when its exponentials cancel: every exp(u) is
// replaced by an independent rational and the evaluation repeated with a second
// draw. Any disagreement or failure means the float path stands.
std::optional<std::vector<Rational>> exponential_free_values(Expr e, const std::vector<SamplePoint>& points, std::uint64_t seed)
{
    std::vector<std::string> names;
    const Expr abstracted = abstract_exponentials(e, names);
    if (names.empty() || !exact_eligible(abstracted)) return std::nullopt;
    const Program prog({abstracted});
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    auto draw = [&] {
        Rational t(static_cast<long>(5000 + rng() % 15000), 10000);
        t.canonicalize();
        return t;
    };
    std::vector<Rational> values;
    for (auto& p : points) {
        Bindings first = p.bindings(), second = first;
        for (auto& n : names) {
            first[n] = draw();
            second[n] = draw();
        }
        try {
            const Rational v = prog.run_exact(first)[0];
            if (v != prog.run_exact(second)[0]) return std::nullopt;
            values.push_back(v);
        } catch (const EvalError&) {
            return std::nullopt;
        }
    }
    return values;
}

} // namespace

ZeroTestResult zero_test(Expr e, const WebSpec& web, const ZeroTestPolicy& policy)
{
    ZeroTestResult result;
    result.mode = exact_eligible(e) ? Mode::exact : Mode::floating;
    const Program prog({e});
    Sampler sampler(web, 0, policy.max_rejections);
    const int draws = web.parameters().empty() ? 1 : policy.parameter_draws;

    std::vector<SamplePoint> points;
    try {
        for (int d = 0; d < draws; ++d) {
            auto params = sampler.draw_parameters();
            for (int i = 0; i < policy.points; ++i) points.push_back(sampler.next_point(params));
        }
    } catch (const SamplingError& err) {
        result.reason = err.what();
        return result;
    }

    BigFloat threshold = power_of_two(-static_cast<long>(policy.precision / 2), policy.precision);
    auto evaluate_at = [&](const SamplePoint& p) {
        PointOutcome out;
        try {
            if (result.mode == Mode::exact) {
                const Rational r = prog.run_exact(p.bindings())[0];
                out.passed = sgn(r) == 0;
                out.residual = decimal(r);
            } else {
                BigFloat scale(policy.precision);
                const BigFloat r = prog.run_float(p.bindings(), policy.precision, &scale)[0];
                BigFloat bound = threshold;
                if (scale > BigFloat(1.0, policy.precision)) bound = threshold * scale;
                out.passed = r.abs() < bound;
                out.residual = r.is_zero() ? "0" : r.to_string(20);
            }
            out.evaluated = true;
        } catch (const EvalError&) {
            out.evaluated = false;
        }
        return out;
    };

    std::vector<PointOutcome> outcomes(points.size());
    parallel_for(points.size(), policy.threads, [&](std::size_t i) { outcomes[i] = evaluate_at(points[i]); });

    // singular samples are replaced in index order, so the stream stays deterministic
    try {
        for (std::size_t i = 0; i < points.size(); ++i) {
            while (!outcomes[i].evaluated) {
                sampler.reject("expression singular at (" + to_string(points[i].x) + ", " + to_string(points[i].y) + ")");
                points[i] = sampler.next_point(points[i].params);
                outcomes[i] = evaluate_at(points[i]);
            }
        }
    } catch (const SamplingError& err) {
        result.reason = err.what();
        return result;
    }

    if (result.mode == Mode::floating) {
        if (auto values = exponential_free_values(e, points, web.seed)) {
            result.mode = Mode::exact;
            for (std::size_t i = 0; i < points.size(); ++i) {
                outcomes[i].passed = sgn((*values)[i]) == 0;
                outcomes[i].residual = decimal((*values)[i]);
            }
        }
    }

    int failures = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        result.evidence.push_back({points[i], outcomes[i].residual, result.mode, outcomes[i].passed});
        if (!outcomes[i].passed) ++failures;
    }
    if (failures == 0) {
        result.verdict = Verdict::zero;
    } else if (result.mode == Mode::exact || failures >= 2) {
        result.verdict = Verdict::nonzero;
    } else {
        result.verdict = Verdict::inconclusive;
        result.reason = "a single float sample exceeded the threshold";
    }
    return result;
}

// ---------------------------------------------------------------------------
// Order-tracked construction

namespace {

DiffOrder join(DiffOrder a, DiffOrder b) { return {std::max(a.f, b.f), std::max(a.g, b.g), std::max(a.a, b.a)}; }

DiffOrder step(DiffOrder o)
{
    // ∂_i divides by a first derivative of f
    return {std::max(o.f + 1, 1), o.g < 0 ? -1 : o.g + 1, o.a < 0 ? -1 : o.a + 1};
}

Tracked operator+(const Tracked& a, const Tracked& b) { return {a.e + b.e, join(a.order, b.order)}; }
Tracked operator-(const Tracked& a, const Tracked& b) { return {a.e - b.e, join(a.order, b.order)}; }
Tracked operator*(const Tracked& a, const Tracked& b) { return {a.e * b.e, join(a.order, b.order)}; }
Tracked operator/(const Tracked& a, const Tracked& b) { return {a.e / b.e, join(a.order, b.order)}; }
Tracked operator*(long c, const Tracked& a) { return {c * a.e, a.order}; }

template <class T, class D1, class D2>
T I1_formula(const T& m, const T& H, const T& K, D1 d1, D2 d2)
{
    const T m1 = d1(m), m2 = d2(m);
    return -1 * d1(m1) + 2 * d1(m2) + (m + H) * m1 - 2 * ((2 * H + m) * m2) + H * (m * m) + (2 * (H * H) - d2(H)) * m - d1(K) +
           2 * (H * K);
}

template <class T, class D1, class D2>
T I2_formula(const T& m, const T& H, const T& K, D1 d1, D2 d2)
{
    const T m1 = d1(m), m2 = d2(m);
    return -1 * d2(m2) + 2 * d1(m2) + 2 * ((m - H) * m1) - (H + m) * m2 - H * (m * m) + (2 * (H * H) - d1(H)) * m - d2(K) +
           2 * (H * K);
}

struct TrackedWeb {
    Tracked H, K, mu;
};

TrackedWeb tracked_scalars(const WebSpec& web, int alpha)
{
    auto td1 = [&](const Tracked& t) { return Tracked{d1(t.e, web), step(t.order)}; };
    auto td2 = [&](const Tracked& t) { return Tracked{d2(t.e, web), step(t.order)}; };
    const Tracked H{web_H(web), {2, -1, -1}};
    const Tracked K = td1(H) - td2(H);
    const Tracked a{basic_invariant(web, alpha), {1, 1, 0}};
    const Tracked mu = (td1(a) - a * td2(a)) / (a - a * a);
    return {H, K, mu};
}

void assert_order(const DiffOrder& o)
{
    if (o.f > 4) throw std::logic_error("invariant construction exceeded 4 derivatives of f");
}

} // namespace

Expr I1_of_mu(Expr m, const WebSpec& web)
{
    auto D1 = [&](Expr e) { return d1(e, web); };
    auto D2 = [&](Expr e) { return d2(e, web); };
    return I1_formula<Expr>(m, web_H(web), web_K(web), D1, D2);
}

Expr I2_of_mu(Expr m, const WebSpec& web)
{
    auto D1 = [&](Expr e) { return d1(e, web); };
    auto D2 = [&](Expr e) { return d2(e, web); };
    return I2_formula<Expr>(m, web_H(web), web_K(web), D1, D2);
}

Tracked I1_tracked(const WebSpec& web, int alpha)
{
    auto s = tracked_scalars(web, alpha);
    auto td1 = [&](const Tracked& t) { return Tracked{d1(t.e, web), step(t.order)}; };
    auto td2 = [&](const Tracked& t) { return Tracked{d2(t.e, web), step(t.order)}; };
    Tracked out = I1_formula<Tracked>(s.mu, s.H, s.K, td1, td2);
    assert_order(out.order);
    return out;
}

Tracked I2_tracked(const WebSpec& web, int alpha)
{
    auto s = tracked_scalars(web, alpha);
    auto td1 = [&](const Tracked& t) { return Tracked{d1(t.e, web), step(t.order)}; };
    auto td2 = [&](const Tracked& t) { return Tracked{d2(t.e, web), step(t.order)}; };
    Tracked out = I2_formula<Tracked>(s.mu, s.H, s.K, td1, td2);
    assert_order(out.order);
    return out;
}

Expr I_fp(const WebSpec& web, Expr p)
{
    const Expr p1 = d1(p, web), p2 = d2(p, web);
    if (p1.is_zero() || p2.is_zero()) throw DegenerateDirection("I(f,p): p is a function of one variable only");
    if (p1 == p2) throw DegenerateDirection("I(f,p): dp is proportional to df");
    const Expr p11 = d1(p1, web), p22 = d2(p2, web), p12 = d1(p2, web);
    const Expr num = pow(p1, 2L) * p22 - 2 * (p1 * p2 * p12) + pow(p2, 2L) * p11;
    const Expr den = p1 * p2 * (p2 - p1);
    return num / den;
}

Expr J_invariant(const WebSpec& web, int alpha)
{
    if (alpha < 5) throw std::out_of_range("J needs alpha >= 5");
    return I_fp(web, web.g(alpha)) - I_fp(web, web.g(4));
}

// ---------------------------------------------------------------------------

InvariantReport run_invariant(std::string name, Expr e, const WebSpec& web, const ZeroTestPolicy& policy)
{
    const auto start = std::chrono::steady_clock::now();
    InvariantReport report;
    report.name = std::move(name);
    report.expr = e;
    report.dag_size = dag_size(e);
    report.test = zero_test(e, web, policy);
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Outcome aggregate(const std::vector<InvariantReport>& reports)
{
    bool all_zero = true;
    for (auto& r : reports) {
        if (r.test.verdict == Verdict::nonzero) return Outcome::no;
        if (r.test.verdict != Verdict::zero) all_zero = false;
    }
    return all_zero ? Outcome::yes : Outcome::inconclusive;
}

WebVerdict check_dweb(const WebSpec& web, const ZeroTestPolicy& policy)
{
    WebVerdict out;
    const Tracked i1 = I1_tracked(web, 4);
    const Tracked i2 = I2_tracked(web, 4);
    out.reports.push_back(run_invariant("I1", i1.e, web, policy));
    out.reports.back().order = i1.order;
    out.reports.push_back(run_invariant("I2", i2.e, web, policy));
    out.reports.back().order = i2.order;
    for (int alpha = 5; alpha <= web.d(); ++alpha) {
        InvariantReport r;
        try {
            r = run_invariant("J" + std::to_string(alpha), J_invariant(web, alpha), web, policy);
        } catch (const DegenerateDirection& err) {
            r.name = "J" + std::to_string(alpha);
            r.test.reason = err.what();
        }
        out.reports.push_back(std::move(r));
    }
    out.outcome = aggregate(out.reports);
    return out;
}

WebVerdict check_4web(Expr f, Expr g, const Domain& domain, std::uint64_t seed, const ZeroTestPolicy& policy)
{
    return check_dweb(WebSpec(f, {g}, domain, seed), policy);
}

} // namespace weblin
