#include "weblin/corpus.hpp"
#include "weblin/linearizer.hpp"
#include "weblin/syntax.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace weblin;

namespace {

Grid grid_of(const Domain& d, int n)
{
    Grid g;
    g.x_lo = d.x_lo.get_d();
    g.x_hi = d.x_hi.get_d();
    g.y_lo = d.y_lo.get_d();
    g.y_hi = d.y_hi.get_d();
    g.nx = g.ny = n;
    return g;
}

LinearizerOptions options_for(const CorpusCase& c, int grid = 41)
{
    LinearizerOptions o;
    o.grid = grid;
    o.params = c.linearize_params;
    return o;
}

double worst_straightness(const LinearizationResult& r)
{
    double m = 0;
    for (auto& s : r.straightness) m = std::max(m, s.residual);
    return m;
}

} // namespace

TEST_CASE("zero gauge on an affine web")
{
    const WebSpec web(parse("x+y"), {parse("x-y")});
    LinearizerOptions o;
    const LinearizationResult r = linearize(web, o);
    const LambdaFields l = integrate_lambda(web, r.grid, o);
    CHECK(l.lambda1.max_abs() == 0);
    CHECK(l.lambda2.max_abs() == 0);
    const ConnectionField conn = build_connection(l, web, o);
    for (auto& n : conn.nabla)
        for (auto& i : n)
            for (auto& j : i) {
                CHECK(j[0] == 0);
                CHECK(j[1] == 0);
            }
    CHECK(r.flatness_residual == 0);
    CHECK(r.path_independence_residual == 0);
    for (int j = 0; j < r.grid.ny; j += 5)
        for (int i = 0; i < r.grid.nx; i += 5) {
            CHECK(r.u.at(i, j) == doctest::Approx(r.grid.x(i) - r.base[0]).epsilon(1e-13));
            CHECK(r.v.at(i, j) == doctest::Approx(r.grid.y(j) - r.base[1]).epsilon(1e-13));
        }
    CHECK(worst_straightness(r) < 1e-13);
    CHECK(r.warnings.empty());
}

TEST_CASE("deformation tensor shape")
{
    const CorpusCase& c = corpus_case(2);
    const WebSpec web = make_web(c);
    LinearizerOptions o = options_for(c);
    o.lambda0 = {0.1, -0.1};
    const Grid g = grid_of(c.domain, 21);
    const ConnectionField conn = build_connection(integrate_lambda(web, g, o), web, o);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            // geodesy constraint T11^1 + T22^2 = 2 (T12^1 + T12^2)
            CHECK(conn.T11_1.at(i, j) + conn.T22_2.at(i, j) == doctest::Approx(2 * (conn.T12_1.at(i, j) + conn.T12_2.at(i, j))));
            const auto& n = conn.nabla[static_cast<std::size_t>(j * g.nx + i)];
            const double H = conn.H.at(i, j);
            CHECK(n[0][0][0] == doctest::Approx(-(conn.T11_1.at(i, j) + H)));
            CHECK(n[0][0][1] == doctest::Approx(-conn.T12_1.at(i, j)));
            CHECK(n[1][1][0] == doctest::Approx(-conn.T12_2.at(i, j)));
            CHECK(n[1][1][1] == doctest::Approx(-(conn.T22_2.at(i, j) + H)));
        }
}

TEST_CASE("Example 1: path independence and flatness")
{
    const CorpusCase& c = corpus_case(1);
    const WebSpec web = make_web(c);
    LinearizerOptions o = options_for(c);
    const LambdaFields l = integrate_lambda(web, grid_of(c.domain, 41), o);
    CHECK(l.path_discrepancy < 1e-8);
    const ConnectionField conn = build_connection(l, web, o);
    CHECK(flatness_residual(conn) < 1e-6);

    // one perturbed node shows up in the finite-difference curvature
    ConnectionField bumped = conn;
    bumped.lambda1.at(20, 20) += 0.1;
    CHECK(flatness_residual(bumped) > 1e-3);
}

TEST_CASE("refinement in a nontrivial gauge")
{
    // with lambda0 = 0 the exact solution on these webs is lambda = 0 and every
    // residual sits at rounding level; a nonzero gauge exposes the truncation error
    const CorpusCase& c = corpus_case(1);
    const WebSpec web = make_web(c);
    LinearizerOptions o = options_for(c);
    o.lambda0 = {0.1, -0.1};
    double disc[2], flat[2];
    for (int k = 0; k < 2; ++k) {
        const LambdaFields l = integrate_lambda(web, grid_of(c.domain, k ? 81 : 41), o);
        disc[k] = l.path_discrepancy;
        flat[k] = flatness_residual(build_connection(l, web, o));
    }
    CHECK(disc[0] > 1e-13);
    CHECK(disc[0] / disc[1] >= 3.5);
    CHECK(flat[0] / flat[1] >= 3.5);
}

TEST_CASE("straightness on linearizable corpus webs")
{
    const LinearizationResult r3 = linearize(make_web(corpus_case(3)), options_for(corpus_case(3)));
    CHECK(worst_straightness(r3) < 1e-6);
    const LinearizationResult r6 = linearize(make_web(corpus_case(6)), options_for(corpus_case(6)));
    CHECK(r6.straightness.size() == 4);
    CHECK(worst_straightness(r6) < 1e-5);
    const LinearizationResult r2 = linearize(make_web(corpus_case(2)), options_for(corpus_case(2)));
    CHECK(worst_straightness(r2) < 1e-5);
    for (auto& s : r2.straightness) {
        CHECK(s.traced == 7);
        CHECK(s.skipped == 0);
    }
    const LinearizationResult five = linearize(make_web(corpus_case(101)), options_for(corpus_case(101)));
    CHECK(five.straightness.size() == 5);
    CHECK(worst_straightness(five) < 1e-5);
}

TEST_CASE("straightness converges under refinement")
{
    const CorpusCase& c = corpus_case(1);
    const double coarse = worst_straightness(linearize(make_web(c), options_for(c, 41)));
    const double fine = worst_straightness(linearize(make_web(c), options_for(c, 81)));
    CHECK(coarse / fine >= 3.5);
}

TEST_CASE("gauge freedom")
{
    // a nonzero gauge makes lambda2 vary like 1/x near the left edge, so the
    // finite-difference flatness gate needs the finer grid
    const CorpusCase& c = corpus_case(2);
    LinearizerOptions o = options_for(c, 161);
    const LinearizationResult a = linearize(make_web(c), o);
    o.lambda0 = {0.1, -0.1};
    const LinearizationResult b = linearize(make_web(c), o);
    CHECK(worst_straightness(b) < 1e-5);
    CHECK(std::fabs(a.u.at(0, 0) - b.u.at(0, 0)) > 1e-4);
}

TEST_CASE("affine invariance of straightness")
{
    const CorpusCase& c = corpus_case(2);
    const WebSpec web = make_web(c);
    const LinearizerOptions o = options_for(c);
    const LinearizationResult r = linearize(web, o);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int t = 0; t < 3; ++t) {
        std::array<double, 6> A{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng)};
        if (std::fabs(A[0] * A[3] - A[1] * A[2]) < 0.2) continue;
        const auto s = straightness_report(r, web, o.leaves, o, &A);
        for (std::size_t k = 0; k < s.size(); ++k)
            CHECK(std::fabs(s[k].residual - r.straightness[k].residual) <= 1e-9 + 1e-3 * r.straightness[k].residual);
    }

    // a nonlinear change of (u, v) bends the leaves
    const LinearizationResult bent = [&] {
        LinearizationResult copy = r;
        for (std::size_t k = 0; k < copy.u.values.size(); ++k) copy.u.values[k] += 3 * copy.v.values[k] * copy.v.values[k];
        return copy;
    }();
    const auto s = straightness_report(bent, web, o.leaves, o);
    double worst = 0;
    for (auto& f : s) worst = std::max(worst, f.residual);
    CHECK(worst > 1e-3);
}

TEST_CASE("negative control and precondition")
{
    const CorpusCase& c = corpus_case(5);
    CHECK_THROWS_AS(require_linearizable(Outcome::no, false), LinearizerError);
    CHECK_THROWS_AS(require_linearizable(Outcome::inconclusive, false), LinearizerError);
    CHECK_NOTHROW(require_linearizable(Outcome::no, true));
    CHECK_NOTHROW(require_linearizable(Outcome::yes, false));

    LinearizerOptions o = options_for(c);
    CHECK_THROWS_AS(linearize(make_web(c), o), LinearizerError);
    o.force = true;
    const LinearizationResult r = linearize(make_web(c), o);
    CHECK(worst_straightness(r) > 1e-2);
    CHECK(!r.warnings.empty());
}

TEST_CASE("linearizer errors")
{
    const CorpusCase& c1 = corpus_case(1);
    LinearizerOptions o = options_for(c1);
    o.lambda0 = {200, 200};
    try {
        linearize(make_web(c1), o);
        FAIL("no error");
    } catch (const LinearizerError& e) {
        CHECK(std::string(e.what()).find("shrink grid") != std::string::npos);
    }

    const CorpusCase& c6 = corpus_case(6);
    try {
        linearize(make_web(c6), LinearizerOptions{});
        FAIL("no error");
    } catch (const LinearizerError& e) {
        CHECK(std::string(e.what()).find("'n'") != std::string::npos);
    }

    LinearizerOptions outside = options_for(c1);
    outside.base = std::array<double, 2>{5.0, 5.0};
    CHECK_THROWS_AS(linearize(make_web(c1), outside), LinearizerError);

    LinearizerOptions tiny = options_for(c1, 3);
    CHECK_THROWS_AS(linearize(make_web(c1), tiny), LinearizerError);
}

TEST_CASE("base point snaps to the nearest node")
{
    const CorpusCase& c = corpus_case(1);
    LinearizerOptions o = options_for(c, 11);
    o.base = std::array<double, 2>{0.26, 0.74};
    const LinearizationResult r = linearize(make_web(c), o);
    CHECK(r.base[0] == doctest::Approx(0.25));
    CHECK(r.base[1] == doctest::Approx(0.75));
    CHECK(r.u.at(0, 10) == 0);
    CHECK(r.v.at(0, 10) == 0);
}

TEST_CASE("deterministic across thread counts")
{
    const CorpusCase& c = corpus_case(3);
    LinearizerOptions a = options_for(c), b = options_for(c);
    a.threads = 1;
    b.threads = 4;
    const LinearizationResult ra = linearize(make_web(c), a), rb = linearize(make_web(c), b);
    CHECK(ra.u.values == rb.u.values);
    CHECK(ra.v.values == rb.v.values);
    for (std::size_t k = 0; k < ra.straightness.size(); ++k) CHECK(ra.straightness[k].residual == rb.straightness[k].residual);
}

TEST_CASE("line fit and interpolation")
{
    std::vector<std::array<double, 2>> line, arc;
    for (int k = 0; k <= 20; ++k) {
        const double t = k / 20.0;
        line.push_back({1 + 2 * t, -3 + 5 * t});
        arc.push_back({std::cos(t), std::sin(t)});
    }
    CHECK(line_fit_residual(line) < 1e-15);
    // sagitta of a unit arc of angle 1 over its chord, split about the fitted line
    const double r = line_fit_residual(arc);
    CHECK(r > 0.05);
    CHECK(r < 0.15);
    std::vector<std::array<double, 2>> vertical{{2, 0}, {2, 1}, {2, 3}};
    CHECK(line_fit_residual(vertical) < 1e-15);

    Grid g;
    g.nx = g.ny = 9;
    ScalarField f(g);
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 9; ++i) f.at(i, j) = std::pow(g.x(i), 3) - 2 * g.x(i) * g.y(j) * g.y(j) + g.y(j);
    for (double px : {0.0, 0.13, 0.5, 0.97, 1.0})
        for (double py : {0.0, 0.31, 0.77, 1.0})
            CHECK(f.interpolate(px, py) == doctest::Approx(std::pow(px, 3) - 2 * px * py * py + py).epsilon(1e-12));
}

TEST_CASE("SVG output")
{
    const CorpusCase& c = corpus_case(2);
    const std::string svg = render_svg(linearize(make_web(c), options_for(c)));
    CHECK(svg.rfind("<svg", 0) == 0);
    for (const char* name : {"\"x\"", "\"y\"", "\"f\"", "\"g4\""}) CHECK(svg.find(std::string("data-foliation=") + name) != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
    CHECK(polylines == 2 * 4 * 7);
}
