// Acceptance criteria 1-8, one PASS/FAIL line each.

#include "weblin/corpus.hpp"
#include "weblin/covariant.hpp"
#include "weblin/invariants.hpp"
#include "weblin/linearizer.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

using namespace weblin;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail)
{
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Example 5 counts: its exponential cancels from every invariant
bool is_rational_case(int id) { return id == 1 || id == 2 || id == 5 || id == 7 || id == 8 || id == 9; }

void criterion_1()
{
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream d;
    for (auto& c : corpus().examples) {
        const WebVerdict v = check_dweb(make_web(c));
        bool modes = true;
        for (auto& r : v.reports) {
            if (r.test.evidence.empty()) modes = false;
            // ZERO evidence is exact for rational webs and 256-bit float otherwise
            if ((r.test.mode == Mode::exact) != is_rational_case(c.id)) modes = false;
        }
        const bool match = v.outcome == c.expected;
        ok = ok && match && modes;
        d << c.id << ":" << to_string(v.outcome) << (modes ? "" : "(mode!)") << " ";
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    d << "in " << t << "s";
    report(1, ok && t < 600, d.str());
}

void criterion_2()
{
    bool ok = true;
    std::ostringstream d;
    for (auto& c : corpus().examples) {
        const WebVerdict v = check_dweb(substituted_web(c));
        ok = ok && v.outcome == c.expected;
        d << c.id << ":" << to_string(v.outcome) << " ";
    }
    d << "under x -> " << corpus().p << ", y -> " << corpus().q;
    report(2, ok, d.str());
}

void criterion_3()
{
    bool ok = true;
    std::ostringstream d;
    for (auto& c : corpus().examples) {
        const WebSpec web = make_web(c);
        const ZeroTestResult r = zero_test(web_K(web, KFormula::structure) - web_K(web, KFormula::log), web);
        bool exact_zero = true;
        for (auto& e : r.evidence) exact_zero = exact_zero && e.residual == "0";
        const bool good = r.verdict == Verdict::zero && r.evidence.size() >= 8 && (!is_rational_case(c.id) || (r.mode == Mode::exact && exact_zero));
        ok = ok && good;
        d << c.id << ":" << (good ? "ok" : "bad") << (r.mode == Mode::exact ? "/exact " : "/float ");
    }
    report(3, ok, d.str());
}

void criterion_4()
{
    bool ok = true;
    int tested = 0;
    std::ostringstream bad;
    for (auto& c : corpus().examples) {
        const WebSpec web = make_web(c);
        const Expr a = basic_invariant(web, 4);
        const WeightedScalar us[] = {{a, 0}, {d1(a, web), 1}, {d2(a, web), 1}, {web_K(web), 2}};
        for (auto& u : us) {
            const ZeroTestResult r = zero_test(commutator_residual(u, web), web);
            ++tested;
            if (r.verdict != Verdict::zero) {
                ok = false;
                bad << " " << c.id << "/s=" << u.weight;
            }
        }
    }
    report(4, ok, std::to_string(tested) + " residuals (u = a, a1, a2, K; s = 0, 1, 1, 2) on 9 webs" + (ok ? "" : "; failing:" + bad.str()));
}

void criterion_5()
{
    bool ok = true;
    std::ostringstream d;
    for (auto& c : corpus().examples) {
        const WebSpec web = make_web(c);
        const Verdict k1 = zero_test(K1_closed_residual(web), web).verdict, k2 = zero_test(K2_closed_residual(web), web).verdict;
        const Verdict i1 = zero_test(I1_tracked(web).e, web).verdict, i2 = zero_test(I2_tracked(web).e, web).verdict;
        const bool same = k1 == i1 && k2 == i2;
        ok = ok && same;
        d << c.id << ":" << (k1 == Verdict::zero && k2 == Verdict::zero ? "00" : "!0") << (same ? "=" : "/") << " ";
    }
    report(5, ok, d.str());
}

void criterion_6()
{
    bool ok = true;
    std::ostringstream d;
    d.precision(2);
    for (int id : {1, 2, 3, 4, 6, 8}) {
        const CorpusCase& c = corpus_case(id);
        const WebSpec web = make_web(c);
        auto discrepancy = [&](int n, std::array<double, 2> lambda0) {
            LinearizerOptions o;
            o.grid = n;
            o.params = c.linearize_params;
            o.lambda0 = lambda0;
            Grid g;
            g.x_lo = c.domain.x_lo.get_d();
            g.x_hi = c.domain.x_hi.get_d();
            g.y_lo = c.domain.y_lo.get_d();
            g.y_hi = c.domain.y_hi.get_d();
            g.nx = g.ny = n;
            return integrate_lambda(web, g, o).path_discrepancy;
        };
        // default gauge lambda0 = 0: the exact solution is lambda = 0 here and the
        // discrepancy is rounding noise, so the halving ratio is also measured in
        // the gauge (0.1, -0.1) where the O(h^4) truncation error is resolved
        const double d41 = discrepancy(41, {0, 0}), d81 = discrepancy(81, {0, 0});
        const double g41 = discrepancy(41, {0.1, -0.1}), g81 = discrepancy(81, {0.1, -0.1});
        const bool rounding = d41 < 1e-13;
        const bool good = d41 < 1e-8 && (rounding || d41 / d81 >= 3.5) && g41 / g81 >= 3.5;
        ok = ok && good;
        d << std::scientific << id << ":" << d41 << (rounding ? "(rounding)" : "") << " ratio_gauge=" << std::fixed << g41 / g81 << " ";
    }
    report(6, ok, d.str());
}

void criterion_7()
{
    std::ostringstream d;
    d.precision(2);
    bool ok = true;
    for (int id : {2, 3}) {
        const CorpusCase& c = corpus_case(id);
        LinearizerOptions o;
        o.params = c.linearize_params;
        const LinearizationResult r = linearize(make_web(c), o);
        double worst = 0;
        for (auto& s : r.straightness) worst = std::max(worst, s.residual);
        ok = ok && worst < 1e-5 && !r.straightness.empty();
        d << std::scientific << id << ":max=" << worst << " ";
    }
    const CorpusCase& c5 = corpus_case(5);
    LinearizerOptions o;
    o.force = true;
    const LinearizationResult r = linearize(make_web(c5), o);
    double worst = 0;
    for (auto& s : r.straightness) worst = std::max(worst, s.residual);
    ok = ok && worst > 1e-2;
    d << "5(forced):max=" << worst;
    report(7, ok, d.str());
}

void criterion_8()
{
    // asserted during construction: I1_tracked throws past 4 derivatives of f
    bool ok = true;
    int f_max = 0, g_max = 0, a_max = 0;
    for (auto& c : corpus().examples) {
        const WebSpec web = make_web(c);
        try {
            for (const Tracked& t : {I1_tracked(web), I2_tracked(web)}) {
                f_max = std::max(f_max, t.order.f);
                g_max = std::max(g_max, t.order.g);
                a_max = std::max(a_max, t.order.a);
            }
        } catch (const std::logic_error&) {
            ok = false;
        }
    }
    ok = ok && f_max <= 4 && g_max <= 3;
    report(8, ok,
           "max derivative order f=" + std::to_string(f_max) + " (bound 4), g=" + std::to_string(g_max) + " (bound 3), a=" + std::to_string(a_max) +
               " (bound 3)");
}

} // namespace

int main()
{
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
